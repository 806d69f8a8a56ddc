#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Sentetik Sahne Üreteci
----------------------
Bu modül, ölçümlerde kullanılan sentetik veri kümelerini tohumlanmış ve
tekrarlanabilir biçimde üretir:

- Öteleme yapan arka plan (TU, TL, TH, TF)
- Merkezden teğetsel dönen arka plan (D, DF)
- Dairesel yörüngede hareket eden nokta hedef

Tüm rastgelelik, (tohum, sahne türü, amaç) üçlüsünden türetilen ayrı PCG64
akışlarından gelir; yeni bir senaryo eklemek diğerlerinin çıktısını değiştirmez.
"""

import logging
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from numpy.lib.stride_tricks import sliding_window_view

import metrics
from engine import ImageSequence
from errors import InvalidArgumentError
from kernels import CENTERED, FilterParams, Velocity, sample_coeffs
from velocity import VelocityField

logger = logging.getLogger(__name__)

TRANSLATING_VARIANTS = ("TU", "TL", "TH", "TF")
DIVERGING_VARIANTS = ("D", "DF")
SCENARIOS = TRANSLATING_VARIANTS + DIVERGING_VARIANTS

DEFAULT_N = (64, 64, 64)

# Öteleme yapan arka plan
COMPONENT_COUNT = 16
COMPONENT_WINDOW = 16
COMPONENT_BAND = 3
VELOCITY_LIMIT = 2.0
ON_BIN_VELOCITY_STEP = 0.25
NOISE_VARIANCE = {"TU": 0.0, "TL": 0.01, "TH": 0.1, "TF": 0.0}

# Dönen arka plan üreteç filtresi: K = 8 (M = 17), B = 3 (W = 7)
DIVERGING_HALF_WIDTH = 8
DIVERGING_BAND = 3

# Hedef
ORBIT_RADIUS = 12.0
TARGET_SPEED_LIMIT = 2.0
TARGET_PSF = {"TF": (1.0, 2.0), "DF": (0.5, 1.0)}
# Ham SCR'yi (TF 5.26 dB, DF 3.21 dB) verecek şekilde kalibre edilmiş genlikler
DEFAULT_TARGET_AMPLITUDE = {"TF": 2.06, "DF": 2.385}

# Akış kimlikleri: aynı tohumdaki öteleme varyantları aynı arka planı paylaşır
_STREAM_TYPES = {"translating": 1, "diverging": 2, "target": 3}
_STREAM_PURPOSES = {"background": 0, "noise": 1, "trajectory": 2}


@dataclass
class TargetTrajectory:
    """
    Görüş alanı merkezi etrafında dairesel yörüngedeki nokta hedef

    Args:
        centers: (Nz, 2) kare başına sürekli merkez (x, y)
        radius: Yörünge yarıçapı (piksel)
        tangential_speed: Teğetsel hız (piksel/kare, işaretli)
        start_angle: Başlangıç açısı (radyan)
        psf_sigma: Gauss PSF standart sapması
        psf_cutoff: PSF'nin sert kesim yarıçapı
        amplitude: Hedef genliği
    """

    centers: np.ndarray
    radius: float
    tangential_speed: float
    start_angle: float
    psf_sigma: float
    psf_cutoff: float
    amplitude: float

    def __post_init__(self):
        self.centers = np.asarray(self.centers, dtype=float)
        if self.centers.ndim != 2 or self.centers.shape[1] != 2:
            raise InvalidArgumentError(f"Hedef merkezleri (Nz, 2) olmalıdır: {self.centers.shape}")

    @property
    def frames(self) -> int:
        return self.centers.shape[0]

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "tangential_speed": self.tangential_speed,
            "start_angle": self.start_angle,
            "psf_sigma": self.psf_sigma,
            "psf_cutoff": self.psf_cutoff,
            "amplitude": self.amplitude,
            "frames": self.frames,
        }

    @classmethod
    def from_dict(cls, data: dict, N: Sequence[int]) -> "TargetTrajectory":
        return orbit(N, data["frames"], data["tangential_speed"], data["start_angle"],
                     data["psf_sigma"], data["psf_cutoff"], data["amplitude"], data["radius"])


@dataclass
class Dataset:
    """Üretilmiş dizi ve tam yer gerçeği"""

    seq: ImageSequence
    scenario: str
    truth_field: VelocityField
    target: Optional[TargetTrajectory]
    seed: int
    noise_sigma: float
    background_velocity: Optional[Velocity] = None

    @property
    def name(self) -> str:
        return f"{self.scenario.lower()}_{self.seed:04d}"


def _check_seed(seed: int) -> int:
    if int(seed) != seed or seed < 0:
        raise InvalidArgumentError(f"Tohum negatif olmayan tamsayı olmalıdır: {seed}")
    return int(seed)


def _check_N(N: Sequence[int]) -> Tuple[int, int, int]:
    N = tuple(int(n) for n in N)
    if len(N) != 3 or any(n < 1 for n in N):
        raise InvalidArgumentError(f"N üç pozitif bileşenli olmalıdır: {N}")
    return N


def stream(seed: int, kind: str, purpose: str) -> np.random.Generator:
    """(tohum, tür, amaç) üçlüsü için bağımsız ve platformdan bağımsız akış"""
    sequence = np.random.SeedSequence([_check_seed(seed), _STREAM_TYPES[kind],
                                       _STREAM_PURPOSES[purpose]])
    return np.random.Generator(np.random.PCG64(sequence))


def _normalize(data: np.ndarray) -> np.ndarray:
    data = data - data.mean()
    return data / np.sqrt(np.mean(data ** 2))


def orbit(N: Sequence[int], frames: int, tangential_speed: float, start_angle: float,
          psf_sigma: float, psf_cutoff: float, amplitude: float,
          radius: float = ORBIT_RADIUS) -> TargetTrajectory:
    """Kapalı biçimli yörünge: açı(t) = başlangıç + t * hız / yarıçap"""
    Nx, Ny = int(N[0]), int(N[1])
    t = np.arange(int(frames), dtype=float)
    angle = start_angle + t * tangential_speed / radius
    centers = np.column_stack([
        (Nx - 1) / 2.0 + radius * np.cos(angle),
        (Ny - 1) / 2.0 + radius * np.sin(angle),
    ])
    return TargetTrajectory(centers=centers, radius=float(radius),
                            tangential_speed=float(tangential_speed),
                            start_angle=float(start_angle), psf_sigma=float(psf_sigma),
                            psf_cutoff=float(psf_cutoff), amplitude=float(amplitude))


def target_trajectory(rng: np.random.Generator, N: Sequence[int], Nz: int, psf_sigma: float,
                      cutoff: float, amplitude: float) -> TargetTrajectory:
    """
    Rastgele yörünge parametreleri çeker

    Args:
        rng: Yörünge akışı
        N: Dizi boyutları (Nx, Ny, Nz)
        Nz: Kare sayısı
        psf_sigma: PSF standart sapması
        cutoff: PSF kesim yarıçapı
        amplitude: Hedef genliği

    Returns:
        Hedef yörüngesi
    """
    speed = rng.uniform(-TARGET_SPEED_LIMIT, TARGET_SPEED_LIMIT)
    start = rng.uniform(0.0, 2.0 * np.pi)
    return orbit(N, Nz, speed, start, psf_sigma, cutoff, amplitude)


def target_planes(shape: Sequence[int], trajectory: TargetTrajectory) -> np.ndarray:
    """Birim genlikli hedef katkısı, (Nz, Ny, Nx)"""
    Nz, Ny, Nx = shape
    if trajectory.frames < Nz:
        raise InvalidArgumentError(f"Yörünge {trajectory.frames} kare, dizi {Nz} kare")
    y = np.arange(Ny, dtype=float)[None, :, None]
    x = np.arange(Nx, dtype=float)[None, None, :]
    cx = trajectory.centers[:Nz, 0][:, None, None]
    cy = trajectory.centers[:Nz, 1][:, None, None]
    d2 = (x - cx) ** 2 + (y - cy) ** 2
    psf = np.exp(-d2 / (2.0 * trajectory.psf_sigma ** 2))
    return np.where(d2 <= trajectory.psf_cutoff ** 2, psf, 0.0)


def inject_target(seq: ImageSequence, trajectory: TargetTrajectory) -> ImageSequence:
    """Hedefi PSF ile diziye toplamsal olarak ekler"""
    if trajectory.amplitude == 0.0:
        return ImageSequence(data=seq.data.copy(), mask=seq.mask,
                             frame_rate_hint=seq.frame_rate_hint)
    data = seq.data + trajectory.amplitude * target_planes(seq.data.shape, trajectory)
    return ImageSequence(data=data, mask=seq.mask, frame_rate_hint=seq.frame_rate_hint)


def _translating_background(seed: int, N: Tuple[int, int, int],
                            on_bin: bool) -> Tuple[np.ndarray, Velocity]:
    rng = stream(seed, "translating", "background")
    fx = rng.uniform(-COMPONENT_BAND, COMPONENT_BAND, COMPONENT_COUNT) / COMPONENT_WINDOW
    fy = rng.uniform(-COMPONENT_BAND, COMPONENT_BAND, COMPONENT_COUNT) / COMPONENT_WINDOW
    phase = rng.uniform(0.0, 2.0 * np.pi, COMPONENT_COUNT)
    vx, vy = rng.uniform(-VELOCITY_LIMIT, VELOCITY_LIMIT, 2)
    if on_bin:
        fx = np.rint(fx * COMPONENT_WINDOW) / COMPONENT_WINDOW
        fy = np.rint(fy * COMPONENT_WINDOW) / COMPONENT_WINDOW
        vx = np.rint(vx / ON_BIN_VELOCITY_STEP) * ON_BIN_VELOCITY_STEP
        vy = np.rint(vy / ON_BIN_VELOCITY_STEP) * ON_BIN_VELOCITY_STEP

    Nx, Ny, Nz = N
    fz = -vx * fx - vy * fy
    ex = np.exp(2j * np.pi * np.outer(fx, np.arange(Nx)))
    ey = np.exp(2j * np.pi * np.outer(fy, np.arange(Ny)))
    ez = np.exp(2j * np.pi * np.outer(fz, np.arange(Nz))) * np.exp(1j * phase)[:, None]
    data = np.einsum("ct,cy,cx->tyx", ez, ey, ex, optimize=True).real
    return _normalize(data), Velocity(float(vx), float(vy))


def gen_translating(seed: int, variant: str, N: Sequence[int] = DEFAULT_N, on_bin: bool = False,
                    amplitude: Optional[float] = None) -> Dataset:
    """
    Öteleme yapan arka plan: 16 eşit ağırlıklı sinüzoidal bileşen, tek hız

    Args:
        seed: Tohum
        variant: "TU", "TL", "TH" veya "TF"
        N: Dizi boyutları (Nx, Ny, Nz)
        on_bin: Frekansları k/16 kutularına, hızı 1/4 ızgarasına yuvarlar
        amplitude: TF hedef genliği (None ise kalibre edilmiş varsayılan)

    Returns:
        Veri kümesi
    """
    variant = variant.upper()
    if variant not in TRANSLATING_VARIANTS:
        raise InvalidArgumentError(f"Bilinmeyen öteleme senaryosu: {variant}")
    seed = _check_seed(seed)
    N = _check_N(N)
    data, v = _translating_background(seed, N, on_bin)

    sigma = float(np.sqrt(NOISE_VARIANCE[variant]))
    if sigma > 0.0:
        rng = stream(seed, "translating", "noise")
        # TL ve TH aynı gürültü desenini farklı ölçekle kullanır
        data = data + sigma * rng.standard_normal(data.shape)

    seq = ImageSequence(data=data)
    target = None
    if variant == "TF":
        target = _draw_target(seed, N, variant, amplitude)
        seq = inject_target(seq, target)
    truth = VelocityField.constant(data.shape, v)
    logger.debug("Öteleme kümesi: %s tohum=%d v=(%.3f, %.3f)", variant, seed, v.vx, v.vy)
    return Dataset(seq=seq, scenario=variant, truth_field=truth, target=target, seed=seed,
                   noise_sigma=sigma, background_velocity=v)


def _draw_target(seed: int, N: Tuple[int, int, int], variant: str,
                 amplitude: Optional[float]) -> TargetTrajectory:
    sigma, cutoff = TARGET_PSF[variant]
    if amplitude is None:
        amplitude = DEFAULT_TARGET_AMPLITUDE[variant]
    # TF ve DF aynı yörünge parametrelerini paylaşır
    rng = stream(seed, "target", "trajectory")
    return target_trajectory(rng, N, N[2], sigma, cutoff, amplitude)


def diverging_velocity(N: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Görüş alanı merkezi etrafında saat yönünün tersine teğetsel hız alanı

    Hız = 4R(N-1) / (2R^2 + (N-1)^2); merkezde 0, köşelerde sqrt(2).

    Returns:
        (vx, vy), her biri (Ny, Nx)
    """
    Nx, Ny = int(N[0]), int(N[1])
    span = float(max(Nx, Ny) - 1)
    dx = np.arange(Nx, dtype=float)[None, :] - (Nx - 1) / 2.0
    dy = np.arange(Ny, dtype=float)[:, None] - (Ny - 1) / 2.0
    R = np.hypot(dx, dy)
    speed = 4.0 * R * span / (2.0 * R ** 2 + span ** 2) if span > 0 else np.zeros_like(R)
    safe = np.where(R > 0, R, 1.0)
    vx = np.where(R > 0, -dy / safe * speed, 0.0)
    vy = np.where(R > 0, dx / safe * speed, 0.0)
    return vx, vy


def _diverging_params() -> FilterParams:
    M = 2 * DIVERGING_HALF_WIDTH + 1
    return FilterParams(M=(M, M, M), Msyn=(1, 1, 1), B=(DIVERGING_BAND, DIVERGING_BAND, M // 2),
                        indexing=CENTERED, label="diverging-generator")


def _row_kernels(params: FilterParams, vx: np.ndarray, vy: np.ndarray) -> np.ndarray:
    """Bir satırdaki her piksel için (my, mx) düzleminde ters çevrilmiş çekirdek, (Nx, M*M, M)"""
    M = params.M[0]
    kernels = np.empty((vx.size, M * M, M))
    for i, (ux, uy) in enumerate(zip(vx, vy)):
        H = sample_coeffs(params, (0, 0, 0), Velocity(float(ux), float(uy)))
        kernels[i] = H.transpose(1, 0, 2)[::-1, ::-1, :].reshape(M * M, M)
    return kernels


def _filter_row(windows: np.ndarray, row: int, kernels: np.ndarray, Nz: int) -> np.ndarray:
    M = kernels.shape[-1]
    patches = windows[:, row].reshape(windows.shape[0], windows.shape[2], M * M).transpose(1, 0, 2)
    Q = np.matmul(patches, kernels)
    out = np.zeros((Q.shape[0], Nz))
    for iz in range(M):
        start = M - 1 - iz
        out += Q[:, start:start + Nz, iz]
    return out.T


def _diverging_background(seed: int, N: Tuple[int, int, int], threads: int) -> np.ndarray:
    Nx, Ny, Nz = N
    params = _diverging_params()
    K = DIVERGING_HALF_WIDTH
    M = params.M[0]
    rng = stream(seed, "diverging", "background")
    noise = rng.standard_normal((Nz + 2 * K, Ny + 2 * K, Nx + 2 * K))
    windows = sliding_window_view(noise, (M, M), axis=(1, 2))
    vx, vy = diverging_velocity(N)

    def run(row):
        return _filter_row(windows, row, _row_kernels(params, vx[row], vy[row]), Nz)

    rows = Parallel(n_jobs=max(1, int(threads)), prefer="threads")(
        delayed(run)(row) for row in range(Ny)
    )
    return _normalize(np.stack(rows, axis=1))


def gen_diverging(seed: int, variant: str = "DF", N: Sequence[int] = DEFAULT_N,
                  amplitude: Optional[float] = None, threads: int = 1) -> Dataset:
    """
    Dönen arka plan: beyaz gürültünün piksel başına hız ayarlı filtrelerden geçirilmesi

    Args:
        seed: Tohum
        variant: "D" (hedefsiz) veya "DF"
        N: Dizi boyutları (Nx, Ny, Nz)
        amplitude: DF hedef genliği (None ise kalibre edilmiş varsayılan)
        threads: Satır başına iş parçacığı sayısı (çıktı bundan bağımsızdır)

    Returns:
        Veri kümesi
    """
    variant = variant.upper()
    if variant not in DIVERGING_VARIANTS:
        raise InvalidArgumentError(f"Bilinmeyen dönen sahne senaryosu: {variant}")
    seed = _check_seed(seed)
    N = _check_N(N)
    data = _diverging_background(seed, N, threads)
    seq = ImageSequence(data=data)
    target = None
    if variant == "DF":
        target = _draw_target(seed, N, variant, amplitude)
        seq = inject_target(seq, target)
    vx, vy = diverging_velocity(N)
    shape = data.shape
    truth = VelocityField(vx=np.broadcast_to(vx, shape), vy=np.broadcast_to(vy, shape),
                          mask=np.ones(shape, dtype=bool))
    logger.debug("Dönen sahne kümesi: %s tohum=%d", variant, seed)
    return Dataset(seq=seq, scenario=variant, truth_field=truth, target=target, seed=seed,
                   noise_sigma=0.0)


def generate(seed: int, scenario: str, N: Sequence[int] = DEFAULT_N,
             amplitude: Optional[float] = None, threads: int = 1) -> Dataset:
    """Senaryo adına göre uygun üreteci çağırır"""
    scenario = scenario.upper()
    if scenario in TRANSLATING_VARIANTS:
        return gen_translating(seed, scenario, N, amplitude=amplitude)
    if scenario in DIVERGING_VARIANTS:
        return gen_diverging(seed, scenario, N, amplitude=amplitude, threads=threads)
    raise InvalidArgumentError(f"Bilinmeyen senaryo: {scenario}")


def calibrate_amplitude(variant: str, seeds: Iterable[int], target_db: float,
                        N: Sequence[int] = DEFAULT_N, low: float = 0.0, high: float = 10.0,
                        tol: float = 1e-3, max_iter: int = 60) -> float:
    """
    Ham SCR'yi hedef değere getiren hedef genliğini ikiye bölmeyle bulur

    Arka plan ve yörünge her tohum için bir kez üretilir; genlik yalnızca hedef
    katkısını ölçekler.

    Args:
        variant: "TF" veya "DF"
        seeds: Kalibrasyon tohumları
        target_db: İstenen toplu ham SCR (dB)
        N: Dizi boyutları
        low, high: Arama aralığı
        tol: Genlik toleransı
        max_iter: En fazla yineleme

    Returns:
        Kalibre edilmiş genlik
    """
    variant = variant.upper()
    if variant not in TARGET_PSF:
        raise InvalidArgumentError(f"Kalibrasyon yalnızca TF ve DF için yapılır: {variant}")
    seeds = list(seeds)
    if not seeds:
        raise InvalidArgumentError("En az bir kalibrasyon tohumu gerekir")

    cases = []
    for seed in seeds:
        dataset = generate(seed, variant, N, amplitude=0.0)
        planes = target_planes(dataset.seq.data.shape, dataset.target)
        cases.append((dataset.seq.data, planes, dataset.target))

    def aggregate(amplitude: float) -> float:
        ratios = []
        for background, planes, trajectory in cases:
            seq = ImageSequence(data=background + amplitude * planes)
            ratios.append(metrics.scr_ratio(seq, replace(trajectory, amplitude=amplitude)))
        return metrics.aggregate_scr_db(ratios)

    if aggregate(high) < target_db:
        raise InvalidArgumentError(f"Hedef SCR {target_db} dB, genlik {high} ile de ulaşılamıyor")
    for iteration in range(max_iter):
        mid = 0.5 * (low + high)
        value = aggregate(mid)
        logger.debug("Kalibrasyon %d: genlik=%.5f SCR=%.3f dB", iteration, mid, value)
        if value < target_db:
            low = mid
        else:
            high = mid
        if high - low < tol:
            break
    amplitude = 0.5 * (low + high)
    logger.info("%s genliği kalibre edildi: %.4f (%d tohum, hedef %.2f dB)",
                variant, amplitude, len(seeds), target_db)
    return amplitude
