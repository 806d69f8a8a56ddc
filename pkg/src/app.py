#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Uzay-Zamansal Öngörü Hatası Filtresi Uygulaması
-----------------------------------------------
Bu uygulama, sentetik veri üretimi, beyazlatma, hız alanı kestirimi, ölçüm ve
kazanç eğrileri için bir komut satırı arayüzü sağlar.

Çıkış kodları: 0 başarılı, 2 geçersiz argüman/yapılandırma, 3 dosya hatası,
4 sayısal hata.
"""

import argparse
import functools
import json
import logging
import os
import sys
import time
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

import engine
import metrics
import scenesim
import sequence_io
import velocity
from config import TABLE_CONFIGS, Config, FilterConfig, bundled_filter_config, resolve_filter_config
from engine import ImageSequence
from errors import InvalidArgumentError, NumericError, SequenceFormatError
from kernels import FilterParams, Velocity

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

TABLE_SCENARIOS = ("TU", "TL", "TH", "TF", "DF")
DIVERGING_CONFIGS = ("3D_DIV", "2D_DIV", "2D_DIV_FVG")
LKD = "LKD"
RAW = "RAW"
RUN_LOG = "run_log.json"

# Karşılaştırma için yayımlanmış toplu değerler
REFERENCE_RMS = {
    "3D_SAT": {"TU": 0.17, "TL": 0.17, "TH": 0.17, "TF": 0.18},
    "3D_LAT": {"TU": 0.11, "TL": 0.11, "TH": 0.11, "TF": 0.12},
    "2D_LAT": {"TU": 0.11, "TL": 0.11, "TH": 0.11, "TF": 0.12},
    "2D_LAT_FVG": {"TU": 0.07, "TL": 0.07, "TH": 0.08, "TF": 0.08},
    "3D_DIV": {"DF": 0.13},
    "2D_DIV": {"DF": 0.15},
    "2D_DIV_FVG": {"DF": 0.14},
    LKD: {"TU": 0.26, "TL": 0.26, "TH": 0.32, "TF": 0.31, "DF": 0.22},
}
REFERENCE_SCR_DB = {
    RAW: {"TF": 5.26, "DF": 3.21},
    "3D_SAT": {"TF": 20.49},
    "3D_LAT": {"TF": 22.24},
    "2D_LAT": {"TF": 15.43},
    "2D_LAT_FVG": {"TF": 15.43},
    "3D_DIV": {"DF": 7.58},
    "2D_DIV": {"DF": 8.28},
    "2D_DIV_FVG": {"DF": 8.28},
}


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--threads", type=int, help="İş parçacığı sayısı (yoksa STPEF_THREADS)")
    parser.add_argument("--verbose", action="store_true", help="Ayrıntılı günlük")


def parse_args(argv: Optional[Sequence[str]] = None):
    """Komut satırı argümanlarını ayrıştırır"""
    parser = argparse.ArgumentParser(
        description="Hıza ayarlı 3-B öngörü hatası filtresiyle arka plan beyazlatma"
    )
    parser.add_argument("--settings", help="JSON uygulama yapılandırması (varsayılan: config/config.json)")
    _add_common_options(parser)
    # Alt komuttan sonra da kabul edilir; verilmezse üst düzey değer korunur
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    _add_common_options(common)

    subparsers = parser.add_subparsers(dest="command", help="Komut")
    add_parser = functools.partial(subparsers.add_parser, parents=[common])

    sim_parser = add_parser("sim", help="Sentetik veri kümeleri üret")
    sim_parser.add_argument("--scenario", required=True, nargs="+",
                            choices=[s.lower() for s in scenesim.SCENARIOS], help="Senaryo(lar)")
    sim_parser.add_argument("--seed", type=int, default=1, help="Başlangıç tohumu")
    sim_parser.add_argument("--count", type=int, help="Senaryo başına küme sayısı")
    sim_parser.add_argument("--N", type=_triplet, help="Boyutlar Nx,Ny,Nz")
    sim_parser.add_argument("--out", required=True, help="Çıkış dizini")

    whiten_parser = add_parser("whiten", help="Diziyi beyazlat")
    whiten_parser.add_argument("--config", required=True, help="Filtre yapılandırması (dosya veya ad)")
    whiten_parser.add_argument("--mode", choices=engine.MODES, help="Mod (varsayılan: yapılandırmadaki)")
    whiten_parser.add_argument("--in", dest="input", required=True, help="ISEQ dosyası veya sim dizini")
    whiten_parser.add_argument("--out", required=True, help="Çıkış dizini")
    whiten_parser.add_argument("--eq15b-bz", type=int, help="Kısaltılmış zaman bandı")
    whiten_parser.add_argument("--pgm-frame", type=int, help="Bu kareyi PGM olarak da yaz")

    flow_parser = add_parser("flow", help="Yalnızca hız alanı kestir")
    flow_parser.add_argument("--method", required=True, choices=["lkd", "ac3d", "xcorr2d"])
    flow_parser.add_argument("--config", help="Filtre yapılandırması (ac3d/xcorr2d)")
    flow_parser.add_argument("--in", dest="input", required=True, help="ISEQ dosyası veya sim dizini")
    flow_parser.add_argument("--out", required=True, help="Çıkış dizini")

    metrics_parser = add_parser("metrics", help="SCR ve RMS hız hatası")
    metrics_parser.add_argument("--pred", help="whiten/flow çıkış dizini")
    metrics_parser.add_argument("--truth", required=True, help="sim dizini")
    metrics_parser.add_argument("--raw", action="store_true", help="Ham dizilerin SCR'si")
    metrics_parser.add_argument("--label", help="Rapor etiketi")
    metrics_parser.add_argument("--out", required=True, help="CSV dosyası")

    response_parser = add_parser("response", help="Kuramsal kazanç eğrileri")
    response_parser.add_argument("--config", required=True, help="Filtre yapılandırması")
    response_parser.add_argument("--v", required=True, type=_velocity, help="Filtre hızı VX,VY")
    response_parser.add_argument("--sweep", required=True, choices=metrics.SWEEPS)
    response_parser.add_argument("--msyn", required=True, type=_int_list, help="m̂xy listesi, örn. 8,9,11,13")
    response_parser.add_argument("--msyn-z", type=int, help="m̂z (varsayılan Mz//2)")
    response_parser.add_argument("--out", required=True, help="CSV dosyası")

    repro_parser = add_parser("repro", help="Karşılaştırma tablolarını üret")
    repro_parser.add_argument("what", choices=["tables"])
    repro_parser.add_argument("--seed", type=int, help="Başlangıç tohumu")
    repro_parser.add_argument("--count", type=int, help="Senaryo başına küme sayısı")
    repro_parser.add_argument("--N", type=_triplet, help="Boyutlar Nx,Ny,Nz")
    repro_parser.add_argument("--out", required=True, help="Çıkış dizini")

    calibrate_parser = add_parser("calibrate", help="Hedef genliğini kalibre et")
    calibrate_parser.add_argument("--scenario", required=True, choices=["tf", "df"])
    calibrate_parser.add_argument("--seeds", type=int, default=10, help="Tohum sayısı")
    calibrate_parser.add_argument("--seed", type=int, default=1, help="Başlangıç tohumu")
    calibrate_parser.add_argument("--target-db", type=float, help="Hedef ham SCR (dB)")
    calibrate_parser.add_argument("--N", type=_triplet, help="Boyutlar Nx,Ny,Nz")
    calibrate_parser.add_argument("--save", action="store_true",
                                  help="Genliği uygulama yapılandırmasına (--settings) yaz")

    return parser.parse_args(argv)


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Virgülle ayrılmış sayılar bekleniyordu: {text}") from e


def _int_list(text: str) -> List[int]:
    values = _float_list(text)
    if not values or any(v != int(v) for v in values):
        raise argparse.ArgumentTypeError(f"Virgülle ayrılmış tamsayılar bekleniyordu: {text}")
    return [int(v) for v in values]


def _triplet(text: str) -> Tuple[int, int, int]:
    values = _int_list(text)
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"Üç bileşen bekleniyordu: {text}")
    return tuple(values)


def _velocity(text: str) -> Velocity:
    values = _float_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"VX,VY bekleniyordu: {text}")
    return Velocity(values[0], values[1])


def save_results(results: Dict, output_path: str = None) -> None:
    """
    Sonuçları dosyaya kaydeder veya ekrana yazdırır

    Args:
        results: Kaydedilecek sonuçlar
        output_path: Sonuçların kaydedileceği dosya yolu (None ise ekrana yazdırır)
    """
    if output_path:
        with open(output_path, "w", encoding="utf-8") as f:
            json.dump(results, f, ensure_ascii=False, indent=2)
        print(f"Sonuçlar {output_path} dosyasına kaydedildi.")
    else:
        print(json.dumps(results, ensure_ascii=False, indent=2))


def load_inputs(path: str) -> List[Tuple[str, ImageSequence]]:
    """Tek bir ISEQ dosyası veya manifest içeren sim dizini"""
    if os.path.isdir(path):
        return [(dataset.name, dataset.seq) for dataset in sequence_io.read_dataset(path)]
    name = os.path.splitext(os.path.basename(path))[0]
    return [(name, sequence_io.read_sequence(path))]


def _scenario_N(args, cfg: Config) -> Tuple[int, int, int]:
    return tuple(args.N) if args.N else tuple(cfg.get("scenesim.N", list(scenesim.DEFAULT_N)))


def _amplitude(cfg: Config, scenario: str) -> Optional[float]:
    return cfg.get(f"scenesim.target_amplitude.{scenario}")


def simulate(args, cfg: Config) -> int:
    """Sentetik veri kümeleri üretir"""
    count = args.count if args.count is not None else int(cfg.get("scenesim.count", 10))
    if count < 1:
        raise InvalidArgumentError(f"--count en az 1 olmalıdır: {count}")
    N = _scenario_N(args, cfg)
    threads = cfg.resolve_threads(args.threads)

    datasets = []
    for scenario in args.scenario:
        scenario = scenario.upper()
        print(f"{scenario} senaryosu için {count} veri kümesi üretiliyor (N={N})...")
        for seed in range(args.seed, args.seed + count):
            datasets.append(scenesim.generate(seed, scenario, N, amplitude=_amplitude(cfg, scenario),
                                              threads=threads))
    sequence_io.write_dataset(args.out, datasets)
    print(f"✅ {len(datasets)} veri kümesi {args.out} dizinine yazıldı.")
    return EXIT_OK


def _eq15b_bz(args, cfg: Config, filter_config: FilterConfig) -> Optional[int]:
    if getattr(args, "eq15b_bz", None) is not None:
        return args.eq15b_bz
    if filter_config.eq15b_bz is not None:
        return filter_config.eq15b_bz
    return cfg.get("engine.eq15b_bz")


def whiten_sequences(args, cfg: Config) -> int:
    """Girdi dizilerini beyazlatır; artık, maske ve hız alanı yazar"""
    filter_config = resolve_filter_config(args.config)
    mode = args.mode or filter_config.mode
    threads = cfg.resolve_threads(args.threads)
    eq15b_bz = _eq15b_bz(args, cfg, filter_config)
    inputs = load_inputs(args.input)
    os.makedirs(args.out, exist_ok=True)

    bank = engine.build_bank(filter_config.params, filter_config.grid)
    runs = []
    for name, seq in inputs:
        start = time.perf_counter()
        residual, field_ = engine.whiten(seq, filter_config.params, filter_config.grid, mode,
                                         bank=bank, eq15b_bz=eq15b_bz, threads=threads)
        elapsed = time.perf_counter() - start
        layout = engine.make_layout(seq.N, filter_config.params)
        sequence_io.write_sequence(os.path.join(args.out, f"{name}_residual.iseq"), residual)
        sequence_io.write_mask(os.path.join(args.out, f"{name}_residual_mask.iseq"), residual.mask)
        sequence_io.write_field(os.path.join(args.out, f"{name}_flow.vfld"), field_)
        if args.pgm_frame is not None:
            sequence_io.export_pgm(os.path.join(args.out, f"{name}_frame{args.pgm_frame:03d}.pgm"),
                                   residual, args.pgm_frame)
        runs.append({
            "name": name,
            "blocks": [int(c) for c in layout.counts],
            "margin": [int(m) for m in layout.margin],
            "coverage": [int(c) for c in layout.coverage],
            "seconds_per_frame": elapsed / seq.N[2],
        })
        print(f"✅ {name}: {int(np.prod(layout.counts))} blok, {elapsed / seq.N[2]:.4f} s/kare")

    save_results({"config": filter_config.name, "config_source": args.config, "mode": mode,
                  "eq15b_bz": eq15b_bz, "threads": threads, "runs": runs},
                 os.path.join(args.out, RUN_LOG))
    return EXIT_OK


def estimate_flows(args, cfg: Config) -> int:
    """Yalnızca hız alanlarını kestirir"""
    threads = cfg.resolve_threads(args.threads)
    inputs = load_inputs(args.input)
    os.makedirs(args.out, exist_ok=True)
    filter_config = None
    config_source = None
    if args.method != "lkd":
        default = "3D_SAT" if args.method == "ac3d" else "2D_LAT"
        config_source = args.config or default
        filter_config = resolve_filter_config(config_source)

    for name, seq in inputs:
        if args.method == "lkd":
            field_ = velocity.lkd_flow(seq)
        else:
            mode = engine.MODE_3D if args.method == "ac3d" else engine.MODE_2D
            field_ = engine.estimate_flow(seq, filter_config.params, filter_config.grid, mode,
                                          threads=threads)
        sequence_io.write_field(os.path.join(args.out, f"{name}_flow.vfld"), field_)
        print(f"✅ {name}: {args.method} hız alanı, {int(field_.mask.sum())} geçerli piksel")
    save_results({"method": args.method, "config_source": config_source, "threads": threads},
                 os.path.join(args.out, RUN_LOG))
    return EXIT_OK


def _block_params(pred_dir: Optional[str]) -> Optional[FilterParams]:
    """Blok kestirimi yapan çalıştırmanın filtre parametreleri; LKD veya kayıt yoksa None"""
    path = os.path.join(pred_dir, RUN_LOG) if pred_dir else None
    if path is None or not os.path.exists(path):
        return None
    with open(path, "r", encoding="utf-8") as f:
        source = json.load(f).get("config_source")
    return resolve_filter_config(source).params if source else None


def _truth_for(dataset, params: Optional[FilterParams]):
    if params is None:
        return dataset.truth_field
    return metrics.block_center_truth(dataset.truth_field, engine.make_layout(dataset.seq.N, params))


def evaluate(args, cfg: Config) -> int:
    """Tahmin dizinini yer gerçeğine göre puanlar"""
    if args.pred is None and not args.raw:
        raise InvalidArgumentError("--pred veya --raw gereklidir")
    rows = []
    params = _block_params(args.pred)
    for dataset in sequence_io.read_dataset(args.truth):
        row = metrics.DatasetMetrics(dataset=dataset.name, scenario=dataset.scenario,
                                     seed=dataset.seed)
        seq = dataset.seq if args.raw else None
        if args.pred is not None:
            residual_path = os.path.join(args.pred, f"{dataset.name}_residual.iseq")
            mask_path = os.path.join(args.pred, f"{dataset.name}_residual_mask.iseq")
            if os.path.exists(residual_path):
                seq = sequence_io.read_sequence(
                    residual_path, mask_path if os.path.exists(mask_path) else None)
            flow_path = os.path.join(args.pred, f"{dataset.name}_flow.vfld")
            if os.path.exists(flow_path):
                row.error_sum, row.error_count = metrics.velocity_error_sums(
                    sequence_io.read_field(flow_path), _truth_for(dataset, params))
        if seq is not None and dataset.target is not None:
            row.scr_ratio = metrics.scr_ratio(seq, dataset.target)
        rows.append(row)

    label = args.label or (RAW if args.raw else os.path.basename(os.path.normpath(args.pred)))
    report = metrics.build_report(rows, label)
    sequence_io.write_metrics_csv(args.out, report)
    print(f"✅ {len(rows)} veri kümesi puanlandı: toplu SCR={report.aggregate_scr_db} dB, "
          f"toplu RMS={report.aggregate_rms}")
    return EXIT_OK


def response_curves(args, cfg: Config) -> int:
    """Seçilen m̂ değerleri için kargaşa ve hedef kazanç eğrileri"""
    filter_config = resolve_filter_config(args.config)
    params = filter_config.params
    msyn_z = args.msyn_z if args.msyn_z is not None else params.M[2] // 2
    oversample = int(cfg.get("gain_curve.oversample", metrics.DEFAULT_OVERSAMPLE))
    if args.sweep == metrics.ANGLE:
        values = cfg.get("gain_curve.angles_deg")
    else:
        values = cfg.get("gain_curve.speed_offsets")

    frames = []
    for m in args.msyn:
        msyn = [(m, m, msyn_z)]
        clutter = metrics.gain_curve(params, msyn, args.v, metrics.CLUTTER, args.sweep, values,
                                     oversample)
        target = metrics.gain_curve(params, msyn, args.v, metrics.TARGET, args.sweep, values,
                                    oversample)
        frames.append(pd.DataFrame({
            "msyn_xy": m,
            "msyn_z": msyn_z,
            "sweep": args.sweep,
            "mismatch": clutter["mismatch"],
            "clutter_gain_db": clutter["gain_db"],
            "target_gain_db": target["gain_db"],
        }))
    table = pd.concat(frames, ignore_index=True)
    table.to_csv(args.out, index=False)
    print(f"✅ Kazanç eğrileri {args.out} dosyasına kaydedildi ({len(table)} satır).")
    return EXIT_OK


def _scenarios_for(config_name: str) -> Tuple[str, ...]:
    if config_name in DIVERGING_CONFIGS:
        return ("DF",)
    return ("TU", "TL", "TH", "TF")


def reproduce_tables(base_seed: int, count: int, N: Sequence[int], threads: int,
                     amplitudes: Dict[str, Optional[float]]) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """
    Toplu RMS hız hatası ve SCR tablolarını üretir

    Returns:
        (rms tablosu, scr tablosu); her satırda karşılaştırma için yayımlanmış değer
    """
    seeds = list(range(base_seed, base_seed + count))
    datasets = {
        scenario: [scenesim.generate(seed, scenario, N, amplitude=amplitudes.get(scenario),
                                     threads=threads) for seed in seeds]
        for scenario in TABLE_SCENARIOS
    }

    errors: Dict[Tuple[str, str], List[Tuple[float, int]]] = {}
    ratios: Dict[Tuple[str, str], List[float]] = {}
    for scenario in ("TF", "DF"):
        ratios[(RAW, scenario)] = [metrics.scr_ratio(d.seq, d.target) for d in datasets[scenario]]

    for name in TABLE_CONFIGS:
        filter_config = bundled_filter_config(name)
        params, grid, mode = filter_config.params, filter_config.grid, filter_config.mode
        bank = engine.build_bank(params, grid)
        for scenario in _scenarios_for(name):
            for dataset in datasets[scenario]:
                if dataset.target is None:
                    field_ = engine.estimate_flow(dataset.seq, params, grid, mode, threads=threads)
                else:
                    residual, field_ = engine.whiten(dataset.seq, params, grid, mode, bank=bank,
                                                     threads=threads)
                    ratios.setdefault((name, scenario), []).append(
                        metrics.scr_ratio(residual, dataset.target))
                errors.setdefault((name, scenario), []).append(
                    metrics.velocity_error_sums(field_, _truth_for(dataset, params)))
        logger.info("%s tamamlandı", name)

    for scenario in TABLE_SCENARIOS:
        for dataset in datasets[scenario]:
            errors.setdefault((LKD, scenario), []).append(
                metrics.velocity_error_sums(velocity.lkd_flow(dataset.seq), dataset.truth_field))

    rms_rows = []
    for (name, scenario), sums in errors.items():
        total = sum(s for s, _ in sums)
        pixels = sum(c for _, c in sums)
        rms_rows.append({"config": name, "scenario": scenario, "datasets": len(sums),
                         "rms_velocity_error": float(np.sqrt(total / pixels)),
                         "reference": REFERENCE_RMS.get(name, {}).get(scenario, np.nan)})
    scr_rows = []
    for (name, scenario), values in ratios.items():
        scr_rows.append({"config": name, "scenario": scenario, "datasets": len(values),
                         "scr_db": metrics.aggregate_scr_db(values),
                         "reference": REFERENCE_SCR_DB.get(name, {}).get(scenario, np.nan)})
    return pd.DataFrame(rms_rows), pd.DataFrame(scr_rows)


def reproduce(args, cfg: Config) -> int:
    """Karşılaştırma tablolarını CSV olarak yazar"""
    base_seed = args.seed if args.seed is not None else int(cfg.get("repro.base_seed", 1))
    count = args.count if args.count is not None else int(cfg.get("scenesim.count", 10))
    if count < 1:
        raise InvalidArgumentError(f"--count en az 1 olmalıdır: {count}")
    N = _scenario_N(args, cfg)
    threads = cfg.resolve_threads(args.threads)
    amplitudes = {s: _amplitude(cfg, s) for s in ("TF", "DF")}

    print(f"Tablolar üretiliyor: tohum {base_seed}..{base_seed + count - 1}, N={N}...")
    start = time.perf_counter()
    rms_table, scr_table = reproduce_tables(base_seed, count, N, threads, amplitudes)
    os.makedirs(args.out, exist_ok=True)
    rms_table.to_csv(os.path.join(args.out, "rms_velocity_error.csv"), index=False)
    scr_table.to_csv(os.path.join(args.out, "scr.csv"), index=False)
    print(scr_table.to_string(index=False))
    print(f"✅ Tablolar {args.out} dizinine yazıldı ({time.perf_counter() - start:.1f} s).")
    return EXIT_OK


def calibrate(args, cfg: Config) -> int:
    """Ham SCR hedefini veren hedef genliğini bulur"""
    scenario = args.scenario.upper()
    target_db = args.target_db if args.target_db is not None else REFERENCE_SCR_DB[RAW][scenario]
    if args.seeds < 1:
        raise InvalidArgumentError(f"--seeds en az 1 olmalıdır: {args.seeds}")
    seeds = range(args.seed, args.seed + args.seeds)
    print(f"{scenario} hedef genliği {target_db:.2f} dB için kalibre ediliyor...")
    amplitude = scenesim.calibrate_amplitude(scenario, seeds, target_db, _scenario_N(args, cfg))
    key = f"scenesim.target_amplitude.{scenario}"
    print(f"✅ {scenario} genliği: {amplitude:.4f} ({key})")
    if args.save:
        cfg.set(key, round(float(amplitude), 4))
        print(f"💾 Kaydedildi: {cfg.save()}")
    return EXIT_OK


COMMANDS = {
    "sim": simulate,
    "whiten": whiten_sequences,
    "flow": estimate_flows,
    "metrics": evaluate,
    "response": response_curves,
    "repro": reproduce,
    "calibrate": calibrate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Ana fonksiyon"""
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INVALID

    cfg = Config(args.settings)
    level = logging.DEBUG if args.verbose else getattr(
        logging, str(cfg.get("logging.level", "INFO")).upper(), logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    handler = COMMANDS.get(args.command)
    if handler is None:
        print("Geçerli bir komut belirtilmedi. Yardım için --help kullanın.")
        return EXIT_INVALID

    try:
        return handler(args, cfg)
    except InvalidArgumentError as e:
        print(f"❌ Geçersiz argüman: {e}")
        return EXIT_INVALID
    except SequenceFormatError as e:
        print(f"❌ Dosya biçimi hatası (kod {e.code}): {e}")
        return EXIT_IO
    except OSError as e:
        print(f"❌ Dosya hatası: {e}")
        return EXIT_IO
    except NumericError as e:
        print(f"❌ Sayısal hata: {e}")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
