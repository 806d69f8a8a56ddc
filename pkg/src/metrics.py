#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Başarım Ölçütleri
-----------------
Filtre çıktılarını puanlar: sinyal/kargaşa oranı (SCR), RMS hız hatası,
veri kümeleri üzerinden toplama ve hız uyumsuzluğuna göre kuramsal kazanç eğrileri.
"""

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from errors import InvalidArgumentError
from kernels import FilterParams, Velocity, dirichlet, window_indices
from velocity import VelocityField

if TYPE_CHECKING:
    from engine import BlockLayout, ImageSequence

logger = logging.getLogger(__name__)

SCR_CEILING_DB = 200.0
SCR_FLOOR_DB = -200.0

CLUTTER = "clutter"
TARGET = "target"
SIGNAL_MODELS = (CLUTTER, TARGET)
ANGLE = "angle"
SPEED = "speed"
SWEEPS = (ANGLE, SPEED)
# Hedef modeli kargaşadan daha geniş bantlıdır: |f| <= 4/Mxy
TARGET_BAND = 4
DEFAULT_OVERSAMPLE = 8

REPORT_COLUMNS = ["config", "dataset", "scenario", "seed", "scr_db", "rms_velocity_error"]
AGGREGATE_ROW = "aggregate"


def to_db(ratio: float) -> float:
    """Doğrusal güç oranını, tavan/taban sınırlarıyla dB'ye çevirir"""
    if not ratio > 0.0:
        return SCR_FLOOR_DB
    if np.isinf(ratio):
        return SCR_CEILING_DB
    return float(np.clip(10.0 * np.log10(ratio), SCR_FLOOR_DB, SCR_CEILING_DB))


def target_region(center: Sequence[float]) -> Tuple[int, int]:
    """Sürekli merkez (cx, cy) için 2x2 bölgenin sol üst pikseli (floor(cx), floor(cy))"""
    return int(np.floor(center[0])), int(np.floor(center[1]))


def scr_ratio(seq: "ImageSequence", trajectory, mask: Optional[np.ndarray] = None) -> float:
    """
    Doğrusal SCR: hedef çevresindeki 2x2 bölgenin ortalama gücü / tüm geçerli piksellerin gücü

    Pay yalnızca 2x2 bölgesi tamamen görüntü içinde ve maskesiz olan karelerden
    hesaplanır.

    Args:
        seq: Dizi
        trajectory: Hedef yörüngesi (kare başına merkezler)
        mask: Geçerli pikseller (None ise dizinin kendi maskesi)

    Returns:
        Güç oranı
    """
    data = seq.data
    valid = seq.valid if mask is None else np.asarray(mask, dtype=bool)
    if valid.shape != data.shape:
        raise InvalidArgumentError(f"Maske boyutu {valid.shape}, dizi {data.shape}")
    if not valid.any():
        raise InvalidArgumentError("Maskede geçerli piksel yok")
    Nz, Ny, Nx = data.shape
    if trajectory.frames < Nz:
        raise InvalidArgumentError(f"Yörünge {trajectory.frames} kare, dizi {Nz} kare")

    powers = []
    for t in range(Nz):
        x0, y0 = target_region(trajectory.centers[t])
        if x0 < 0 or y0 < 0 or x0 + 2 > Nx or y0 + 2 > Ny:
            continue
        if not valid[t, y0:y0 + 2, x0:x0 + 2].all():
            continue
        powers.append(np.mean(data[t, y0:y0 + 2, x0:x0 + 2] ** 2))
    if not powers:
        raise InvalidArgumentError("Hedef bölgesi hiçbir karede geçerli değil")

    numerator = float(np.mean(powers))
    denominator = float(np.mean(data[valid] ** 2))
    if denominator == 0.0:
        return np.inf if numerator > 0.0 else 0.0
    return numerator / denominator


def scr(seq: "ImageSequence", trajectory, mask: Optional[np.ndarray] = None) -> float:
    """SCR (dB); sonsuz oran +200 dB tavanına, sıfır oran -200 dB tabanına sabitlenir"""
    return to_db(scr_ratio(seq, trajectory, mask))


def velocity_error_sums(field_: VelocityField, truth: VelocityField) -> Tuple[float, int]:
    """Geçerli pikseller üzerinden kare hata toplamı ve piksel sayısı"""
    if field_.shape != truth.shape:
        raise InvalidArgumentError(f"Hız alanı boyutları uyumsuz: {field_.shape}, {truth.shape}")
    valid = field_.mask & truth.mask
    count = int(valid.sum())
    if count == 0:
        raise InvalidArgumentError("Hız hatası için geçerli piksel yok")
    err = (field_.vx[valid] - truth.vx[valid]) ** 2 + (field_.vy[valid] - truth.vy[valid]) ** 2
    return float(err.sum()), count


def block_center_truth(truth: VelocityField, layout: "BlockLayout") -> VelocityField:
    """
    Blok kestirimlerinin karşılaştırılacağı gerçek hız alanı

    Her sentez bloğu, kendi analiz penceresinin merkezindeki gerçek hızla
    doldurulur. Çift uzunluklu pencerede merkez iki örnek arasındadır; ortadaki
    örneklerin ortalaması alınır. Kapsam dışındaki pikseller değişmez.
    """
    Nx, Ny, Nz = layout.N
    if truth.shape != (Nz, Ny, Nx):
        raise InvalidArgumentError(f"Hız alanı {truth.shape} ile yerleşim {layout.N} uyumsuz")
    M = layout.params.M
    Msyn = layout.params.Msyn
    out = VelocityField(vx=truth.vx.copy(), vy=truth.vy.copy(), mask=truth.mask.copy())
    for origin in layout.analysis_origins:
        start = [origin[d] - M[d] + 1 for d in range(3)]
        center = tuple(slice(start[d] + (M[d] - 1) // 2, start[d] + M[d] // 2 + 1) for d in (2, 1, 0))
        block = tuple(slice(start[d] + layout.margin[d], start[d] + layout.margin[d] + Msyn[d])
                      for d in (2, 1, 0))
        valid = truth.mask[center]
        if not valid.any():
            out.mask[block] = False
            continue
        out.vx[block] = truth.vx[center][valid].mean()
        out.vy[block] = truth.vy[center][valid].mean()
    return out


def rms_velocity_error(field_: VelocityField, truth: VelocityField) -> float:
    total, count = velocity_error_sums(field_, truth)
    return float(np.sqrt(total / count))


def aggregate_scr_db(ratios: Iterable[float]) -> float:
    """Doğrusal oranların ortalaması alınır, sonra dB'ye çevrilir"""
    ratios = [float(r) for r in ratios]
    if not ratios:
        raise InvalidArgumentError("Toplanacak SCR değeri yok")
    return to_db(float(np.mean(ratios)))


@dataclass
class DatasetMetrics:
    """Tek bir veri kümesinin ölçümleri"""

    dataset: str
    scenario: str
    seed: int
    scr_ratio: Optional[float] = None
    error_sum: Optional[float] = None
    error_count: int = 0

    @property
    def scr_db(self) -> Optional[float]:
        return None if self.scr_ratio is None else to_db(self.scr_ratio)

    @property
    def rms_velocity_error(self) -> Optional[float]:
        if self.error_sum is None or self.error_count == 0:
            return None
        return float(np.sqrt(self.error_sum / self.error_count))


@dataclass
class MetricsReport:
    """Bir yapılandırmanın veri kümesi başına ve toplu ölçümleri"""

    config_label: str
    rows: List[DatasetMetrics] = field(default_factory=list)

    @property
    def scr_db(self) -> List[Optional[float]]:
        return [row.scr_db for row in self.rows]

    @property
    def aggregate_scr_db(self) -> Optional[float]:
        ratios = [row.scr_ratio for row in self.rows if row.scr_ratio is not None]
        return aggregate_scr_db(ratios) if ratios else None

    @property
    def aggregate_rms(self) -> Optional[float]:
        # Kare hatalar havuzlanır; küme RMS'lerinin ortalaması alınmaz
        rows = [row for row in self.rows if row.error_sum is not None and row.error_count]
        if not rows:
            return None
        total = sum(row.error_sum for row in rows)
        count = sum(row.error_count for row in rows)
        return float(np.sqrt(total / count))

    def to_frame(self) -> pd.DataFrame:
        """Veri kümesi başına bir satır ve bir toplu satır; boş raporda yalnızca başlık"""
        records = [
            {
                "config": self.config_label,
                "dataset": row.dataset,
                "scenario": row.scenario,
                "seed": row.seed,
                "scr_db": row.scr_db,
                "rms_velocity_error": row.rms_velocity_error,
            }
            for row in self.rows
        ]
        if records:
            records.append({
                "config": self.config_label,
                "dataset": AGGREGATE_ROW,
                "scenario": "",
                "seed": -1,
                "scr_db": self.aggregate_scr_db,
                "rms_velocity_error": self.aggregate_rms,
            })
        frame = pd.DataFrame.from_records(records, columns=REPORT_COLUMNS)
        return frame.astype({"scr_db": float, "rms_velocity_error": float})


def build_report(rows: Iterable[DatasetMetrics], label: str) -> MetricsReport:
    report = MetricsReport(config_label=label, rows=list(rows))
    logger.info("%s: %d küme, toplu SCR=%s dB, toplu RMS=%s", label, len(report.rows),
                report.aggregate_scr_db, report.aggregate_rms)
    return report


def _axis_factors(params: FilterParams, msyn: Sequence[float], v_filter: Velocity,
                  f: np.ndarray, v_input: Velocity, axis: int) -> np.ndarray:
    """Tek eksenin mz başına çarpanı sum_m D(.) exp(-j2pi f dm) exp(j2pi v f dz), (Mz, f.size)"""
    mx, my, mz = window_indices(params)
    dz = mz - float(msyn[2])
    dm = (mx, my)[axis] - float(msyn[axis])
    vf = (v_filter.vx, v_filter.vy)[axis]
    vi = (v_input.vx, v_input.vy)[axis]
    D = dirichlet((dm[None, :] - vf * dz[:, None]) / params.M[axis], params.W[axis])
    A = D @ np.exp(-2j * np.pi * np.outer(dm, f))
    A *= np.exp(2j * np.pi * vi * np.outer(dz, f))
    return A


def pef_error_response(params: FilterParams, msyn: Sequence[float], v_filter: Velocity,
                       fx: np.ndarray, fy: np.ndarray, v_input: Velocity) -> np.ndarray:
    """
    Öngörü hatası filtresinin aktarımı E(f) = 1 - sum_m H(m) exp(-j2pi f.(m - m̂))

    Girdi, v_input hızıyla hareket eden bir sinüzoittir; zaman frekansı
    ft = -v_input . (fx, fy). H eksenlerde ayrılabildiği için toplam, her mz için
    x ve y çarpanlarının çarpımına indirgenir.

    Args:
        params: Filtre parametreleri
        msyn: Sentez örneği m̂
        v_filter: Filtrenin ayarlandığı hız
        fx, fy: Uzaysal frekans ızgarası eksenleri (1-B)
        v_input: Girdi sinyalinin hızı

    Returns:
        Karmaşık yanıt, (fx.size, fy.size)
    """
    Ax = _axis_factors(params, msyn, v_filter, np.asarray(fx, dtype=float), v_input, 0)
    Ay = _axis_factors(params, msyn, v_filter, np.asarray(fy, dtype=float), v_input, 1)
    Wx, Wy = params.W
    return 1.0 - (Wx * Wy / float(params.total)) * (Ax.T @ Ay)


def pef_error_at(params: FilterParams, msyn: Sequence[float], v_filter: Velocity,
                 fx: np.ndarray, fy: np.ndarray, v_input: Velocity) -> np.ndarray:
    """pef_error_response ile aynı aktarım, ızgara yerine (fx[i], fy[i]) noktalarında"""
    fx = np.asarray(fx, dtype=float).ravel()
    fy = np.asarray(fy, dtype=float).ravel()
    if fx.shape != fy.shape:
        raise InvalidArgumentError("fx ve fy aynı sayıda nokta içermelidir")
    Ax = _axis_factors(params, msyn, v_filter, fx, v_input, 0)
    Ay = _axis_factors(params, msyn, v_filter, fy, v_input, 1)
    Wx, Wy = params.W
    return 1.0 - (Wx * Wy / float(params.total)) * np.sum(Ax * Ay, axis=0)


def _rotate(v: Velocity, angle: float) -> Velocity:
    c, s = np.cos(angle), np.sin(angle)
    return Velocity(c * v.vx - s * v.vy, s * v.vx + c * v.vy)


def _rescale(v: Velocity, offset: float) -> Velocity:
    speed = v.speed
    if speed == 0.0:
        return Velocity(offset, 0.0)
    scale = (speed + offset) / speed
    return Velocity(v.vx * scale, v.vy * scale)


def _band_limits(params: FilterParams, signal_model: str) -> Tuple[float, float]:
    if signal_model not in SIGNAL_MODELS:
        raise InvalidArgumentError(f"Bilinmeyen sinyal modeli: {signal_model}")
    if signal_model == CLUTTER:
        return params.B[0] / float(params.M[0]), params.B[1] / float(params.M[1])
    return TARGET_BAND / float(params.M[0]), TARGET_BAND / float(params.M[1])


def _check_oversample(oversample: int) -> int:
    if int(oversample) < 1:
        raise InvalidArgumentError(f"Aşırı örnekleme en az 1 olmalıdır: {oversample}")
    return int(oversample)


def band_grid(params: FilterParams, signal_model: str,
              oversample: int = DEFAULT_OVERSAMPLE) -> Tuple[np.ndarray, np.ndarray]:
    """Sürekli bant |f| <= B/M için sık (kutular arası) frekans örnekleri"""
    _band_limits(params, signal_model)
    oversample = _check_oversample(oversample)
    axes = []
    for axis in (0, 1):
        B = params.B[axis] if signal_model == CLUTTER else TARGET_BAND
        steps = np.arange(-B * oversample, B * oversample + 1)
        axes.append(steps / float(params.M[axis] * oversample))
    return axes[0], axes[1]


def passage_grid(params: FilterParams, signal_model: str, v_input: Velocity,
                 oversample: int = DEFAULT_OVERSAMPLE) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Bant içindeki frekans noktalarını girdi hareket yönüne göre gruplar

    Izgara, (hareket yönü, dik yön) eksenlerinde eşit aralıklıdır. Aynı grup
    numarasını taşıyan noktaların hareket yönündeki izdüşümü ortaktır; darbe
    sentez örneğinden geçerken bu noktalar aynı fazla döner. Duran girdide
    bütün noktalar tek gruptur.

    Returns:
        (fx, fy, group) düz diziler
    """
    limx, limy = _band_limits(params, signal_model)
    oversample = _check_oversample(oversample)
    speed = v_input.speed
    if speed < 1e-12:
        fx, fy = band_grid(params, signal_model, oversample)
        FX, FY = np.meshgrid(fx, fy, indexing="ij")
        return FX.ravel(), FY.ravel(), np.zeros(FX.size, dtype=int)

    ux, uy = v_input.vx / speed, v_input.vy / speed
    step = 1.0 / (max(params.M[0], params.M[1]) * oversample)
    R = int(np.ceil(np.hypot(limx, limy) / step))
    idx = np.arange(-R, R + 1)
    P, Q = np.meshgrid(idx, idx, indexing="ij")
    FX = (P * ux - Q * uy) * step
    FY = (P * uy + Q * ux) * step
    inside = (np.abs(FX) <= limx + 1e-12) & (np.abs(FY) <= limy + 1e-12)
    return FX[inside], FY[inside], P[inside] + R


def passage_gain(params: FilterParams, msyn: Sequence[float], v_filter: Velocity,
                 v_input: Velocity, signal_model: str,
                 oversample: int = DEFAULT_OVERSAMPLE) -> float:
    """
    Öteleyen darbenin sentez örneğinden geçişi boyunca çıkış/giriş güç oranı

    Girdi, bant içinde faz uyumlu bir frekans sürekliliğidir (zirvesi sentez
    örneğinden geçen sinc darbesi). Dik yöndeki frekanslar uyumlu toplanır,
    hareket yönündeki izdüşümler üzerinden güçler toplanır.
    """
    fx, fy, group = passage_grid(params, signal_model, v_input, oversample)
    E = pef_error_at(params, msyn, v_filter, fx, fy, v_input)
    size = int(group.max()) + 1
    out = np.bincount(group, weights=E.real, minlength=size) ** 2
    out += np.bincount(group, weights=E.imag, minlength=size) ** 2
    ref = np.bincount(group, minlength=size).astype(float) ** 2
    return float(out.sum() / ref.sum())


def gain_curve(params: FilterParams, msyn_set: Sequence[Sequence[float]], v_filter: Velocity,
               signal_model: str, sweep: str, values: Sequence[float],
               oversample: int = DEFAULT_OVERSAMPLE) -> pd.DataFrame:
    """
    Hız uyumsuzluğuna göre öngörü hatası filtresinin kuramsal kazancı

    Her uyumsuzluk değeri için passage_gain hesaplanır; birden fazla m̂
    verildiğinde güç oranlarının ortalaması alınır.

    Args:
        params: Filtre parametreleri
        msyn_set: Sentez örnekleri
        v_filter: Filtre ayar hızı
        signal_model: "clutter" (|f| <= Bxy/Mxy) veya "target" (|f| <= 4/Mxy)
        sweep: "angle" (derece cinsinden döndürme) veya "speed" (piksel/kare ofset)
        values: Uyumsuzluk değerleri
        oversample: Kutular arası örnekleme katsayısı

    Returns:
        "mismatch" ve "gain_db" sütunlu tablo
    """
    if sweep not in SWEEPS:
        raise InvalidArgumentError(f"Bilinmeyen tarama: {sweep}")
    msyn_set = [tuple(float(i) for i in item) for item in msyn_set]
    if not msyn_set:
        raise InvalidArgumentError("En az bir sentez örneği gerekir")
    _band_limits(params, signal_model)

    gains = []
    for value in values:
        if sweep == ANGLE:
            v_input = _rotate(v_filter, np.deg2rad(value))
        else:
            v_input = _rescale(v_filter, value)
        power = np.mean([
            passage_gain(params, msyn, v_filter, v_input, signal_model, oversample)
            for msyn in msyn_set
        ])
        gains.append(10.0 * np.log10(max(power, 1e-30)))
    logger.debug("Kazanç eğrisi: %s/%s, %d nokta", signal_model, sweep, len(gains))
    return pd.DataFrame({"mismatch": np.asarray(values, dtype=float), "gain_db": gains})
