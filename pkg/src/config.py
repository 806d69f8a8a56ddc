#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Yapılandırma Modülü
-------------------
Bu modül, uygulama yapılandırmasını (JSON) ve filtre yapılandırma dosyalarını
(``anahtar = değer``) yönetir.
"""

import json
import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

from engine import MODE_2D, MODE_3D, MODES, VelocityGrid
from errors import ConfigError, InvalidArgumentError
from kernels import FilterParams

logger = logging.getLogger(__name__)

BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIG_DIR = os.path.join(BASE_DIR, "config")
FILTERS_DIR = os.path.join(CONFIG_DIR, "filters")

THREADS_ENV = "STPEF_THREADS"

REQUIRED_FILTER_KEYS = ("mode", "Mxy", "Mz", "Mhat_xy", "Mhat_z", "Bxy", "Bz", "Lhat_xy", "Lhat_z")
OPTIONAL_FILTER_KEYS = ("eq15b_Bz", "target_amplitude")

# Karşılaştırma tablolarında kullanılan yapılandırmalar
TABLE_CONFIGS = ("3D_SAT", "3D_LAT", "2D_LAT", "2D_LAT_FVG", "3D_DIV", "2D_DIV", "2D_DIV_FVG")


class Config:
    """Uygulama yapılandırmasını yöneten sınıf"""

    def __init__(self, config_path: str = None):
        """
        Yapılandırma sınıfını başlatır

        Args:
            config_path: Yapılandırma dosyasının yolu (None ise config/config.json,
                o da yoksa config/config.example.json kullanılır)
        """
        self.config = self._get_default_config()
        # save() varsayılan olarak buraya yazar; örnek dosyanın üzerine yazılmaz
        self.path = config_path or os.path.join(CONFIG_DIR, "config.json")
        if config_path is None and not os.path.exists(self.path):
            config_path = os.path.join(CONFIG_DIR, "config.example.json")
            if not os.path.exists(config_path):
                logger.warning("Yapılandırma dosyası bulunamadı, varsayılanlar kullanılıyor")
                return
        elif config_path is None:
            config_path = self.path

        try:
            with open(config_path, "r", encoding="utf-8") as f:
                loaded = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.warning("Yapılandırma dosyası okunamadı: %s", e)
            return
        self._merge(self.config, loaded)
        logger.debug("Yapılandırma dosyası yüklendi: %s", config_path)

    def _merge(self, base: Dict, override: Dict) -> None:
        for key, value in override.items():
            if isinstance(value, dict) and isinstance(base.get(key), dict):
                self._merge(base[key], value)
            else:
                base[key] = value

    def get(self, key: str, default: Any = None) -> Any:
        """
        Yapılandırma değerini döndürür

        Args:
            key: Nokta ile ayrılmış yapılandırma anahtarı (örn. "scenesim.target_amplitude.TF")
            default: Anahtar bulunamazsa döndürülecek varsayılan değer

        Returns:
            Yapılandırma değeri veya varsayılan değer
        """
        keys = key.split(".")
        value = self.config

        try:
            for k in keys:
                value = value[k]
            return value
        except (KeyError, TypeError):
            return default

    def set(self, key: str, value: Any) -> None:
        """Nokta ile ayrılmış anahtara değer yazar; eksik ara düğümler oluşturulur"""
        *parents, leaf = key.split(".")
        node = self.config
        for k in parents:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                raise ConfigError(f"{key}: '{k}' bir bölüm değil")
        node[leaf] = value

    def save(self, config_path: str = None) -> str:
        """
        Yapılandırmayı JSON olarak yazar

        Args:
            config_path: Hedef dosya (None ise yüklenen dosya, o da yoksa config/config.json)

        Returns:
            Yazılan dosyanın yolu
        """
        config_path = config_path or self.path
        directory = os.path.dirname(os.path.abspath(config_path))
        os.makedirs(directory, exist_ok=True)
        with open(config_path, "w", encoding="utf-8") as f:
            json.dump(self.config, f, ensure_ascii=False, indent=2)
        logger.info("Yapılandırma kaydedildi: %s", config_path)
        return config_path

    def resolve_threads(self, flag: Optional[int] = None) -> int:
        """İş parçacığı sayısı: --threads, yoksa STPEF_THREADS, yoksa engine.threads"""
        if flag is not None:
            value, source = flag, "--threads"
        elif os.environ.get(THREADS_ENV):
            value, source = os.environ[THREADS_ENV], THREADS_ENV
        else:
            value, source = self.get("engine.threads", 1), "engine.threads"
        try:
            threads = int(value)
        except (TypeError, ValueError) as e:
            raise InvalidArgumentError(f"{source} tamsayı olmalıdır: {value}") from e
        if threads < 1:
            raise InvalidArgumentError(f"{source} en az 1 olmalıdır: {threads}")
        return threads

    def _get_default_config(self) -> Dict:
        """
        Varsayılan yapılandırmayı döndürür

        Returns:
            Varsayılan yapılandırma
        """
        return {
            "engine": {
                "threads": 1,
                "eq15b_bz": None
            },
            "scenesim": {
                "N": [64, 64, 64],
                "count": 10,
                "target_amplitude": {
                    "TF": 2.06,
                    "DF": 2.385
                }
            },
            "gain_curve": {
                "oversample": 8,
                "angles_deg": [0, 15, 30, 45, 60, 90, 120, 150, 180],
                "speed_offsets": [-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0]
            },
            "repro": {
                "base_seed": 1
            },
            "logging": {
                "level": "INFO"
            }
        }


@dataclass
class FilterConfig:
    """Filtre yapılandırma dosyasının ayrıştırılmış hali"""

    name: str
    mode: str
    params: FilterParams
    grid: VelocityGrid
    eq15b_bz: Optional[int] = None
    target_amplitude: Optional[float] = None


def _parse_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError as e:
        raise ConfigError(f"{key} tamsayı olmalıdır: {value!r}") from e


def parse_filter_config(text: str, name: str = "") -> FilterConfig:
    """
    ``anahtar = değer`` biçimindeki filtre yapılandırmasını ayrıştırır

    '#' ile başlayan satırlar ve boş satırlar yok sayılır; bilinmeyen anahtarlar
    reddedilir.

    Args:
        text: Dosya içeriği
        name: Yapılandırma adı

    Returns:
        Filtre yapılandırması
    """
    values: Dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"Satır {number}: 'anahtar = değer' bekleniyordu: {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in REQUIRED_FILTER_KEYS + OPTIONAL_FILTER_KEYS:
            raise ConfigError(f"Satır {number}: bilinmeyen anahtar {key!r}")
        if key in values:
            raise ConfigError(f"Satır {number}: {key!r} tekrar tanımlanmış")
        values[key] = value

    missing = [key for key in REQUIRED_FILTER_KEYS if key not in values]
    if missing:
        raise ConfigError(f"Eksik anahtarlar: {', '.join(missing)}")

    mode = values["mode"].lower()
    if mode not in MODES:
        raise ConfigError(f"mode {MODE_3D} veya {MODE_2D} olmalıdır: {values['mode']!r}")
    numbers = {key: _parse_int(key, values[key]) for key in REQUIRED_FILTER_KEYS if key != "mode"}
    try:
        params = FilterParams.from_table(numbers["Mxy"], numbers["Mz"], numbers["Mhat_xy"],
                                         numbers["Mhat_z"], numbers["Bxy"], numbers["Bz"],
                                         label=name)
        grid = VelocityGrid(Lxy=numbers["Lhat_xy"], Lz=numbers["Lhat_z"])
    except ConfigError:
        raise
    except InvalidArgumentError as e:
        raise ConfigError(str(e)) from e
    if mode == MODE_2D and not params.is_2d:
        raise ConfigError(f"2d modu Mz = 1 gerektirir: Mz={numbers['Mz']}")
    if mode == MODE_3D and params.is_2d:
        raise ConfigError("3d modu Mz >= 2 gerektirir")

    eq15b_bz = None
    if "eq15b_Bz" in values:
        eq15b_bz = _parse_int("eq15b_Bz", values["eq15b_Bz"])
        if not 0 <= eq15b_bz <= numbers["Mz"] // 2:
            raise ConfigError(f"eq15b_Bz 0..Mz//2 aralığında olmalıdır: {eq15b_bz}")
    target_amplitude = None
    if "target_amplitude" in values:
        try:
            target_amplitude = float(values["target_amplitude"])
        except ValueError as e:
            raise ConfigError(f"target_amplitude sayı olmalıdır: {values['target_amplitude']!r}") from e

    return FilterConfig(name=name, mode=mode, params=params, grid=grid, eq15b_bz=eq15b_bz,
                        target_amplitude=target_amplitude)


def load_filter_config(path: str) -> FilterConfig:
    """Filtre yapılandırma dosyasını okur; ad, dosya adından türetilir"""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    name = os.path.splitext(os.path.basename(path))[0]
    return parse_filter_config(text, name)


def bundled_filter_names() -> List[str]:
    return sorted(os.path.splitext(item)[0] for item in os.listdir(FILTERS_DIR)
                  if item.endswith(".cfg"))


def bundled_filter_config(name: str) -> FilterConfig:
    """Paketle gelen yapılandırmalardan birini adıyla yükler (örn. "3D_SAT")"""
    path = os.path.join(FILTERS_DIR, f"{name}.cfg")
    if not os.path.exists(path):
        raise ConfigError(f"Bilinmeyen yapılandırma: {name} (mevcut: {', '.join(bundled_filter_names())})")
    return load_filter_config(path)


def resolve_filter_config(value: str) -> FilterConfig:
    """Dosya yolu veya paketle gelen yapılandırma adı"""
    if os.path.exists(value):
        return load_filter_config(value)
    return bundled_filter_config(value)
