#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Arka Plan Hareket Kestirimi
---------------------------
Bu modül, yerel arka plan hızını üç yolla kestirir:

- 3-B öz ilinti (güç spektrumu üzerinden, lz = 1 dilimi) -- birincil yöntem
- ardışık kareler arasındaki 2-B çapraz ilinti -- 2-B filtreler için
- Lucas-Kanade türev yöntemi (LKD) -- yalnızca karşılaştırma amaçlı

Hipotez ızgarası üzerindeki değerler ``values[ix, iy]`` biçiminde tutulur;
``ix = ĺx + Ĺxy`` ve ``iy = ĺy + Ĺxy``.
"""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from errors import InvalidArgumentError
from kernels import Velocity

if TYPE_CHECKING:
    from engine import ImageSequence, SpectrumBlock, VelocityGrid

logger = logging.getLogger(__name__)

# Eşit sayılan hipotez değerleri için bağıl tolerans
TIE_RTOL = 1e-9

# Merkezi fark katsayıları (5 nokta)
CENTRAL_DIFF_5 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0

LKD_WINDOW = 5
LKD_BLUR_SIGMA = 1.0
LKD_COND = 1e-6
LKD_BORDER = 4


@dataclass
class VelocityField:
    """Piksel başına hız kestirimi ve geçerlilik maskesi, (Nz, Ny, Nx)"""

    vx: np.ndarray
    vy: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.vx = np.asarray(self.vx, dtype=float)
        self.vy = np.asarray(self.vy, dtype=float)
        self.mask = np.asarray(self.mask, dtype=bool)
        if not (self.vx.shape == self.vy.shape == self.mask.shape):
            raise InvalidArgumentError(
                f"Hız alanı boyutları uyumsuz: {self.vx.shape}, {self.vy.shape}, {self.mask.shape}"
            )
        # Maskelenmiş girdiler değer taşımaz
        self.vx = np.where(self.mask, self.vx, 0.0)
        self.vy = np.where(self.mask, self.vy, 0.0)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.vx.shape

    @classmethod
    def empty(cls, shape: Sequence[int]) -> "VelocityField":
        zeros = np.zeros(tuple(shape))
        return cls(vx=zeros, vy=zeros.copy(), mask=np.zeros(tuple(shape), dtype=bool))

    @classmethod
    def constant(cls, shape: Sequence[int], v: Velocity) -> "VelocityField":
        shape = tuple(shape)
        return cls(vx=np.full(shape, float(v.vx)), vy=np.full(shape, float(v.vy)),
                   mask=np.ones(shape, dtype=bool))


@dataclass
class AutocorrSlice:
    """Öz ilinti fonksiyonunun hipotez ızgarası üzerindeki dilimi"""

    P: np.ndarray
    values: np.ndarray
    lz: int


def hypotheses(grid: "VelocityGrid") -> np.ndarray:
    """
    Izgaradaki hipotezleri eşitlik bozma sırasına göre döndürür

    Sıra: en küçük hız, sonra en küçük ĺy, sonra en küçük ĺx.

    Returns:
        (H, 4) dizisi; sütunlar ĺx, ĺy, vx, vy
    """
    lvals = np.arange(-grid.Lxy, grid.Lxy + 1)
    lx, ly = np.meshgrid(lvals, lvals, indexing="ij")
    lx = lx.ravel()
    ly = ly.ravel()
    order = np.lexsort((lx, ly, lx * lx + ly * ly))
    lx = lx[order]
    ly = ly[order]
    return np.column_stack([lx, ly, lx / grid.Lz, ly / grid.Lz]).astype(float)


def _preference_order(grid: "VelocityGrid") -> np.ndarray:
    """values[ix, iy].ravel() dizisini tercih sırasına getiren permütasyon"""
    rows = hypotheses(grid)
    size = 2 * grid.Lxy + 1
    ix = rows[:, 0].astype(int) + grid.Lxy
    iy = rows[:, 1].astype(int) + grid.Lxy
    return ix * size + iy


def select_hypotheses(values: np.ndarray, grid: "VelocityGrid") -> Tuple[np.ndarray, np.ndarray]:
    """
    Her blok için en büyük değere sahip hipotezi seçer (eşitlikte tercih sırası)

    Args:
        values: (..., 2L+1, 2L+1) dilim değerleri
        grid: Hız ızgarası

    Returns:
        (ĺx, ĺy) tamsayı dizileri, values'un ön boyutlarında
    """
    size = 2 * grid.Lxy + 1
    lead = values.shape[:-2]
    flat = values.reshape(lead + (size * size,))
    order = _preference_order(grid)
    ranked = flat[..., order]
    best = ranked.max(axis=-1, keepdims=True)
    scale = np.maximum(np.abs(ranked).max(axis=-1, keepdims=True), np.finfo(float).tiny)
    winners = np.argmax(ranked >= best - TIE_RTOL * scale, axis=-1)
    chosen = order[winners]
    return chosen // size - grid.Lxy, chosen % size - grid.Lxy


def _signed_bins(M: int) -> np.ndarray:
    return np.fft.fftfreq(M) * M


def _band_mask(M: int, B: Optional[int]) -> np.ndarray:
    if B is None:
        return np.ones(M, dtype=bool)
    return np.abs(_signed_bins(M)) <= B


def power_spectrum(spec: "SpectrumBlock") -> np.ndarray:
    """Güç spektrumu P = S* S (faz bilgisi atılır)"""
    S = getattr(spec, "S", spec)
    return (np.conj(S) * S).real


def autocorr_at(P: np.ndarray, l: Sequence[float]) -> float:
    """
    Güç spektrumundan (periyodik sınır koşullu) öz ilinti değeri R(l)

    Kesirli yer değiştirmeler için işaretli frekans indeksleri kullanılır.

    Args:
        P: Güç spektrumu, (Mx, My, Mz)
        l: (lx, ly, lz) yer değiştirmesi

    Returns:
        R(l) gerçel değeri
    """
    P = np.asarray(P, dtype=float)
    phase = np.zeros(P.shape)
    for axis, (M, shift) in enumerate(zip(P.shape, l)):
        shape = [1, 1, 1]
        shape[axis] = M
        phase = phase + (_signed_bins(M) * float(shift) / M).reshape(shape)
    return float(np.sum(P * np.cos(2.0 * np.pi * phase)))


def slice_values(P: np.ndarray, grid: "VelocityGrid", lz: int = 1,
                 band: Optional[Tuple[int, int]] = None) -> np.ndarray:
    """
    lz dilimindeki öz ilinti değerleri, tüm hipotezler için

    Args:
        P: (..., Mx, My, Mz) güç spektrumları
        grid: Hız ızgarası; yer değiştirme (vx*lz, vy*lz, lz)
        lz: Zaman yer değiştirmesi
        band: Verilirse yalnızca |kx| <= Bx, |ky| <= By bileşenleri kullanılır

    Returns:
        (..., 2L+1, 2L+1) dizisi
    """
    Mx, My, Mz = P.shape[-3:]
    kx = _signed_bins(Mx)
    ky = _signed_bins(My)
    kz = _signed_bins(Mz)
    if band is not None:
        keep = _band_mask(Mx, band[0])[:, None] & _band_mask(My, band[1])[None, :]
        P = P * keep[..., None]
    shifts = np.arange(-grid.Lxy, grid.Lxy + 1) / grid.Lz * lz
    ex = np.exp(-2j * np.pi * np.outer(shifts, kx) / Mx)
    ey = np.exp(-2j * np.pi * np.outer(shifts, ky) / My)
    ez = np.exp(-2j * np.pi * kz * lz / Mz)
    pz = np.tensordot(P, ez, axes=([-1], [0]))
    t = np.einsum("...ab,ha->...hb", pz, ex)
    return np.einsum("...hb,gb->...hg", t, ey).real


def autocorr_slice(spec: "SpectrumBlock", grid: "VelocityGrid", lz: int = 1,
                   band: Optional[Tuple[int, int]] = None) -> AutocorrSlice:
    P = power_spectrum(spec)
    return AutocorrSlice(P=P, values=slice_values(P, grid, lz=lz, band=band), lz=lz)


def estimate_velocity_3d(spec: "SpectrumBlock", grid: "VelocityGrid",
                         band: Optional[Tuple[int, int]] = None) -> Velocity:
    """
    3-B öz ilinti diliminin (lz = 1) en büyüğünden hız kestirimi

    Args:
        spec: Yerel spektrum bloğu
        grid: Hız hipotez ızgarası
        band: Uzaysal bant sınırı (Bx, By); None ise tüm bant

    Returns:
        Kestirilen hız
    """
    acs = autocorr_slice(spec, grid, lz=1, band=band)
    lx, ly = select_hypotheses(acs.values, grid)
    return Velocity(float(lx) / grid.Lz, float(ly) / grid.Lz)


def cross_values(now: np.ndarray, prev: np.ndarray, grid: "VelocityGrid",
                 band: Optional[Tuple[int, int]] = None) -> np.ndarray:
    """
    Ardışık karelerin çapraz ilintisi, hipotez ızgarasında

    Args:
        now, prev: (..., My, Mx) kare blokları (görüntü sırası: y, x)
        grid: Hız ızgarası
        band: Uzaysal bant sınırı (Bx, By)

    Returns:
        (..., 2L+1, 2L+1) dizisi, [ix, iy] sırasında
    """
    My, Mx = now.shape[-2:]
    cross = np.fft.fft2(now, axes=(-2, -1)) * np.conj(np.fft.fft2(prev, axes=(-2, -1)))
    if band is not None:
        keep = _band_mask(My, band[1])[:, None] & _band_mask(Mx, band[0])[None, :]
        cross = cross * keep
    shifts = np.arange(-grid.Lxy, grid.Lxy + 1) / grid.Lz
    ex = np.exp(2j * np.pi * np.outer(shifts, _signed_bins(Mx)) / Mx)
    ey = np.exp(2j * np.pi * np.outer(shifts, _signed_bins(My)) / My)
    t = np.einsum("...ba,ha->...bh", cross, ex)
    return np.einsum("...bh,gb->...hg", t, ey).real / (Mx * My)


def estimate_velocity_2d(frame_now: np.ndarray, frame_prev: np.ndarray, grid: "VelocityGrid",
                         band: Optional[Tuple[int, int]] = None) -> Velocity:
    """
    Ardışık kareler arasındaki çapraz ilintiden hız kestirimi

    Pozitif v, önceki karedeki desenin şimdiki karede +v kadar kaydığı anlamına gelir.

    Args:
        frame_now: Şimdiki kare bloğu, (My, Mx)
        frame_prev: Önceki kare bloğu, (My, Mx)
        grid: Hız hipotez ızgarası
        band: Uzaysal bant sınırı (Bx, By)

    Returns:
        Kestirilen hız
    """
    frame_now = np.asarray(frame_now, dtype=float)
    frame_prev = np.asarray(frame_prev, dtype=float)
    if frame_now.shape != frame_prev.shape or frame_now.ndim != 2:
        raise InvalidArgumentError(
            f"Kare boyutları uyumsuz: {frame_now.shape}, {frame_prev.shape}"
        )
    lx, ly = select_hypotheses(cross_values(frame_now, frame_prev, grid, band=band), grid)
    return Velocity(float(lx) / grid.Lz, float(ly) / grid.Lz)


def lkd_flow(seq: "ImageSequence", blur_sigma: float = LKD_BLUR_SIGMA,
             window: int = LKD_WINDOW, cond: float = LKD_COND) -> VelocityField:
    """
    Lucas-Kanade türev yöntemiyle piksel başına optik akış

    Kareler Gauss çekirdeğiyle bulanıklaştırılır, türevler 5 noktalı merkezi
    farklarla alınır, gradyan çarpımları 5x5 pencerede toplanır ve her piksel
    için 2x2 en küçük kareler sistemi çözülür.

    Args:
        seq: Görüntü dizisi
        blur_sigma: Bulanıklaştırma standart sapması (piksel)
        window: Toplama penceresi uzunluğu
        cond: En küçük/en büyük özdeğer eşiği

    Returns:
        Hız alanı; koşulsuz pikseller, ilk/son iki kare ve kenar şeridi maskelenir
    """
    data = np.asarray(seq.data, dtype=float)
    Nz, Ny, Nx = data.shape
    if Nz < len(CENTRAL_DIFF_5):
        raise InvalidArgumentError(f"LKD en az {len(CENTRAL_DIFF_5)} kare gerektirir: {Nz}")

    radius = len(CENTRAL_DIFF_5) // 2
    blurred = ndimage.gaussian_filter(data, sigma=(0.0, blur_sigma, blur_sigma),
                                      truncate=radius / blur_sigma, mode="nearest")
    ix = ndimage.correlate1d(blurred, CENTRAL_DIFF_5, axis=2, mode="nearest")
    iy = ndimage.correlate1d(blurred, CENTRAL_DIFF_5, axis=1, mode="nearest")
    it = ndimage.correlate1d(blurred, CENTRAL_DIFF_5, axis=0, mode="nearest")

    def local_sum(values):
        return ndimage.uniform_filter(values, size=(1, window, window), mode="nearest")

    sxx = local_sum(ix * ix)
    sxy = local_sum(ix * iy)
    syy = local_sum(iy * iy)
    sxt = local_sum(ix * it)
    syt = local_sum(iy * it)

    trace = sxx + syy
    disc = np.sqrt((sxx - syy) ** 2 + 4.0 * sxy ** 2)
    lmax = 0.5 * (trace + disc)
    lmin = 0.5 * (trace - disc)
    # Sıfır gradyanlı bölgeler için mutlak taban
    floor = 1e-12 * max(float(np.max(np.abs(data))), 1.0) ** 2
    valid = (lmax > floor) & (lmin >= cond * lmax)

    det = np.where(valid, sxx * syy - sxy ** 2, 1.0)
    vx = (-syy * sxt + sxy * syt) / det
    vy = (sxy * sxt - sxx * syt) / det

    valid[:radius] = False
    valid[Nz - radius:] = False
    border = min(LKD_BORDER, Ny // 2, Nx // 2)
    valid[:, :border] = False
    valid[:, Ny - border:] = False
    valid[:, :, :border] = False
    valid[:, :, Nx - border:] = False

    logger.debug("LKD: %d/%d piksel geçerli", int(valid.sum()), valid.size)
    return VelocityField(vx=vx, vy=vy, mask=valid)
