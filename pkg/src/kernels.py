#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Hız Ayarlı FIR Filtre Tasarımı
------------------------------
Bu modül, 3-B arka plan iyileştirme filtrelerinin matematiksel çekirdeğini içerir:
sinüzoidal tabanlar, Dirichlet çekirdeği, örnek alanı katsayıları, analitik frekans
yanıtı ve DFT kutularındaki frekans alanı katsayıları.

Pencere dizileri (blok, H, frekans katsayıları) her zaman ``(Mx, My, Mz)`` şeklindedir
ve ``[mx, my, mz]`` ile indekslenir.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple, Union

import numpy as np

from errors import InvalidArgumentError

logger = logging.getLogger(__name__)

EDGE = "edge"
CENTERED = "centered"
INDEXING_MODES = (EDGE, CENTERED)

# |sin(pi*r)| bu değerin altındaysa Dirichlet çekirdeği limit değerine eşitlenir
DIRICHLET_EPS = 1e-9

ArrayLike = Union[float, np.ndarray]


class Velocity(NamedTuple):
    """Piksel/kare cinsinden arka plan hızı"""

    vx: float
    vy: float

    @property
    def speed(self) -> float:
        return float(np.hypot(self.vx, self.vy))


def _as_triplet(values: Sequence, name: str) -> Tuple[int, int, int]:
    items = tuple(values)
    if len(items) != 3:
        raise InvalidArgumentError(f"{name} üç bileşenli olmalıdır: {items}")
    try:
        triplet = tuple(int(item) for item in items)
    except (TypeError, ValueError) as e:
        raise InvalidArgumentError(f"{name} tamsayı olmalıdır: {items}") from e
    if any(float(item) != float(cast) for item, cast in zip(items, triplet)):
        raise InvalidArgumentError(f"{name} tamsayı olmalıdır: {items}")
    return triplet


@dataclass(frozen=True)
class FilterParams:
    """
    Tek bir filtre yapılandırmasının pencere, bant ve sentez boyutları

    Args:
        M: Analiz penceresi uzunlukları (Mx, My, Mz)
        Msyn: Sentez bloğu uzunlukları (çift sayı ya da 1)
        B: Tek taraflı bant sayıları (Bx, By, Bz)
        indexing: "edge" (m = 0..M-1) veya "centered" (m = -K..+K)
        label: Yapılandırma adı (örn. "3D_SAT")
    """

    M: Tuple[int, int, int]
    Msyn: Tuple[int, int, int]
    B: Tuple[int, int, int]
    indexing: str = EDGE
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "M", _as_triplet(self.M, "M"))
        object.__setattr__(self, "Msyn", _as_triplet(self.Msyn, "Msyn"))
        object.__setattr__(self, "B", _as_triplet(self.B, "B"))
        self._validate()

    def _validate(self) -> None:
        if self.indexing not in INDEXING_MODES:
            raise InvalidArgumentError(f"Bilinmeyen indeksleme: {self.indexing}")
        for axis, (m, msyn, b) in enumerate(zip(self.M, self.Msyn, self.B)):
            if m < 1:
                raise InvalidArgumentError(f"M[{axis}] pozitif olmalıdır: {m}")
            if msyn < 1 or msyn > m:
                raise InvalidArgumentError(f"Msyn[{axis}] 1..M aralığında olmalıdır: {msyn}")
            if msyn != 1 and msyn % 2:
                raise InvalidArgumentError(f"Msyn[{axis}] çift sayı olmalıdır: {msyn}")
            if (m - msyn) % 2:
                raise InvalidArgumentError(
                    f"Sentez bloğu analiz penceresiyle eş merkezli olamaz: M={m}, Msyn={msyn}"
                )
            if b < 0:
                raise InvalidArgumentError(f"B[{axis}] negatif olamaz: {b}")
        # W < M kısıtı yalnızca uzaysal boyutlar için; Bz kısaltılmış zaman bandını belirler
        for axis in (0, 1):
            if 2 * self.B[axis] + 1 >= self.M[axis]:
                raise InvalidArgumentError(
                    f"W = 2B+1 < M sağlanmıyor (eksen {axis}): B={self.B[axis]}, M={self.M[axis]}"
                )
        if self.B[2] > self.M[2] // 2:
            raise InvalidArgumentError(f"Bz en fazla Mz//2 olabilir: Bz={self.B[2]}, Mz={self.M[2]}")
        if self.indexing == CENTERED and any(m % 2 == 0 for m in self.M):
            raise InvalidArgumentError(f"Merkezli indeksleme tek uzunluklu pencere gerektirir: {self.M}")

    @classmethod
    def from_table(cls, Mxy: int, Mz: int, Msyn_xy: int, Msyn_z: int, Bxy: int, Bz: int,
                   indexing: str = EDGE, label: str = "") -> "FilterParams":
        """Tablo satırı biçimindeki (xy ortak) değerlerden parametre oluşturur"""
        return cls(M=(Mxy, Mxy, Mz), Msyn=(Msyn_xy, Msyn_xy, Msyn_z), B=(Bxy, Bxy, Bz),
                   indexing=indexing, label=label)

    @property
    def W(self) -> Tuple[int, int]:
        return (2 * self.B[0] + 1, 2 * self.B[1] + 1)

    @property
    def delta(self) -> np.ndarray:
        """Modülasyon merkezleri: kenar indekslemede (M-1)/2, merkezli indekslemede 0"""
        if self.indexing == EDGE:
            return (np.asarray(self.M, dtype=float) - 1.0) / 2.0
        return np.zeros(3)

    @property
    def total(self) -> int:
        return self.M[0] * self.M[1] * self.M[2]

    @property
    def is_2d(self) -> bool:
        return self.M[2] == 1

    @property
    def temporal_full_band(self) -> bool:
        return self.B[2] == self.M[2] // 2


@dataclass
class CoefficientGrid:
    """Analiz denklemiyle kestirilen bileşen katsayıları, beta[kx+Bx, ky+By]"""

    beta: np.ndarray

    @property
    def B(self) -> Tuple[int, int]:
        return ((self.beta.shape[0] - 1) // 2, (self.beta.shape[1] - 1) // 2)

    def at(self, kx: int, ky: int) -> complex:
        bx, by = self.B
        if abs(kx) > bx or abs(ky) > by:
            raise InvalidArgumentError(f"Bant dışı bileşen: ({kx}, {ky})")
        return complex(self.beta[kx + bx, ky + by])


@dataclass
class FilterBankEntry:
    """Bir (m̂, v) çifti için tasarlanmış örnek ve frekans alanı katsayıları"""

    params: FilterParams
    msyn_origin: Tuple[int, int, int]
    v: Velocity
    H: np.ndarray
    Hf: np.ndarray


def dirichlet(a: ArrayLike, A: int) -> ArrayLike:
    """
    Periyodik sinc fonksiyonu sin(pi*A*a) / (A*sin(pi*a))

    Tekil noktalarda (a tamsayı) limit değeri döndürülür: A tek ise 1,
    A çift ise (-1)^a.

    Args:
        a: Değerlendirme noktası (skaler veya dizi)
        A: Çekirdek derecesi (A >= 1)

    Returns:
        Çekirdek değeri, girdiyle aynı şekilde
    """
    if A < 1:
        raise InvalidArgumentError(f"Dirichlet derecesi pozitif olmalıdır: {A}")
    a = np.asarray(a, dtype=float)
    alpha = np.rint(a)
    r = a - alpha
    # Tamsayı kaydırması: A tekse çift simetri, A çiftse (-1)^alpha
    sign = np.where(np.mod(alpha, 2.0) == 0.0, 1.0, -1.0) if A % 2 == 0 else 1.0
    s = np.sin(np.pi * r)
    near = np.abs(s) < DIRICHLET_EPS
    ratio = np.sin(np.pi * A * r) / (A * np.where(near, 1.0, s))
    out = sign * np.where(near, 1.0, ratio)
    if out.ndim == 0:
        return float(out)
    return out


def basis_g(m: Sequence[ArrayLike], fx: float, fy: float, v: Velocity,
            M: Sequence[int]) -> ArrayLike:
    """
    Hıza göre eğilmiş 3-B sinüzoidal taban bileşeni G(m; fx, fy, v)

    Args:
        m: (mx, my, mz) örnek indeksleri (skaler veya yayınlanabilir diziler)
        fx, fy: Uzaysal frekanslar (çevrim/örnek)
        v: Eğim hızı; fz = -vx*fx - vy*fy
        M: Pencere boyutları

    Returns:
        Karmaşık taban değeri
    """
    mx, my, mz = (np.asarray(item, dtype=float) for item in m)
    fz = -v.vx * fx - v.vy * fy
    value = np.exp(2j * np.pi * (fx * mx + fy * my + fz * mz)) / np.sqrt(float(np.prod(M)))
    if np.ndim(value) == 0:
        return complex(value)
    return value


def window_indices(params: FilterParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Her boyut için pencere indeksleri (kenar: 0..M-1, merkezli: -K..+K)"""
    if params.indexing == EDGE:
        return tuple(np.arange(m, dtype=float) for m in params.M)
    return tuple(np.arange(m, dtype=float) - (m - 1) // 2 for m in params.M)


def window_grid(params: FilterParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return np.meshgrid(*window_indices(params), indexing="ij")


def synthesis_indices(params: FilterParams) -> List[Tuple[int, int, int]]:
    """
    Pencerenin ortasındaki sentez örneklerinin indeksleri

    Kenar indekslemede m̂, her boyutta [(M-Msyn)/2, (M+Msyn)/2) aralığındadır.
    """
    ranges = []
    for m, msyn in zip(params.M, params.Msyn):
        start = (m - msyn) // 2
        if params.indexing == CENTERED:
            start -= (m - 1) // 2
        ranges.append(range(start, start + msyn))
    return list(itertools.product(*ranges))


def _band(B: int) -> np.ndarray:
    return np.arange(-B, B + 1)


def estimate_coeffs(block: np.ndarray, v: Velocity, params: FilterParams) -> CoefficientGrid:
    """
    Analiz denklemi: beta(kx, ky) = sum_m G(m; kx/Mx, ky/My, v) * blok(m)

    Args:
        block: Gecikme indeksli veri bloğu, (Mx, My, Mz)
        v: Taban eğim hızı
        params: Filtre parametreleri

    Returns:
        Bileşen katsayıları
    """
    block = np.asarray(block, dtype=float)
    if block.shape != params.M:
        raise InvalidArgumentError(f"Blok boyutu {block.shape}, beklenen {params.M}")
    Mx, My, Mz = params.M
    mx, my, mz = window_indices(params)
    kx = _band(params.B[0])
    ky = _band(params.B[1])
    ex = np.exp(2j * np.pi * np.outer(kx, mx) / Mx)
    ey = np.exp(2j * np.pi * np.outer(ky, my) / My)
    fz = -v.vx * kx[:, None] / Mx - v.vy * ky[None, :] / My
    ez = np.exp(2j * np.pi * fz[:, :, None] * mz[None, None, :])
    beta = np.einsum("ai,bj,abk,ijk->ab", ex, ey, ez, block, optimize=True)
    return CoefficientGrid(beta=beta / np.sqrt(float(params.total)))


def sample_coeffs(params: FilterParams, msyn: Sequence[float], v: Velocity) -> np.ndarray:
    """
    Örnek alanı arka plan iyileştirme katsayıları H(m; m̂, v)

    H(m) = WxWy/(MxMyMz) * D_Wx([mx-m̂x-vx(mz-m̂z)]/Mx) * D_Wy([my-m̂y-vy(mz-m̂z)]/My)

    Args:
        params: Filtre parametreleri
        msyn: Sentez örneği m̂ (kesirli olabilir; ara değerleme/dışdeğerleme)
        v: Ayar hızı

    Returns:
        Gerçel katsayı dizisi, (Mx, My, Mz)
    """
    Mx, My, _ = params.M
    Wx, Wy = params.W
    mx, my, mz = window_grid(params)
    shift = mz - float(msyn[2])
    ax = (mx - float(msyn[0]) - v.vx * shift) / Mx
    ay = (my - float(msyn[1]) - v.vy * shift) / My
    return (Wx * Wy / float(params.total)) * dirichlet(ax, Wx) * dirichlet(ay, Wy)


def _response_factors(fx, fy, fz, kx: int, ky: int, params: FilterParams,
                      msyn: Sequence[float], v: Velocity):
    """Tek bir (kx, ky) bileşeni için b*c*d çarpanları (x, y, z ayrı ayrı)"""
    Mx, My, Mz = params.M
    dx_, dy_, dz_ = params.delta
    tilt = v.vx * kx / Mx + v.vy * ky / My
    bx = np.exp(-2j * np.pi * kx / Mx * (float(msyn[0]) - dx_))
    by = np.exp(-2j * np.pi * ky / My * (float(msyn[1]) - dy_))
    bz = np.exp(2j * np.pi * tilt * (float(msyn[2]) - dz_))
    x_part = bx * np.exp(-2j * np.pi * fx * dx_) * dirichlet(fx - kx / Mx, Mx)
    y_part = by * np.exp(-2j * np.pi * fy * dy_) * dirichlet(fy - ky / My, My)
    z_part = bz * np.exp(-2j * np.pi * fz * dz_) * dirichlet(fz + tilt, Mz)
    return x_part, y_part, z_part


def freq_response(f: Sequence[ArrayLike], params: FilterParams, msyn: Sequence[float],
                  v: Velocity) -> ArrayLike:
    """
    Arka plan iyileştirme filtresinin kapalı biçimli frekans yanıtı Q(f; m̂, v)

    Toplama sırası sabittir: ky dışta, kx içte.

    Args:
        f: (fx, fy, fz) frekansları (skaler veya yayınlanabilir diziler)
        params: Filtre parametreleri
        msyn: Sentez örneği m̂
        v: Ayar hızı

    Returns:
        Karmaşık yanıt
    """
    fx, fy, fz = (np.asarray(item, dtype=float) for item in f)
    total = np.zeros(np.broadcast(fx, fy, fz).shape, dtype=complex)
    for ky in _band(params.B[1]):
        for kx in _band(params.B[0]):
            x_part, y_part, z_part = _response_factors(fx, fy, fz, kx, ky, params, msyn, v)
            total += x_part * y_part * z_part
    total /= np.sqrt(float(params.total))
    if total.ndim == 0:
        return complex(total)
    return total


def freq_coeffs(params: FilterParams, msyn: Sequence[float], v: Velocity) -> np.ndarray:
    """
    Frekans alanı katsayıları: Q'nun tüm DFT kutularında (k/M) değerlendirilmesi

    Eksenlerde çarpanlara ayrılabildiği için toplam, (kx, ky) üzerinden tek bir
    tensör daraltmasıyla hesaplanır.

    Returns:
        Karmaşık dizi, (Mx, My, Mz), standart DFT sırasında
    """
    Mx, My, Mz = params.M
    fx = np.arange(Mx) / Mx
    fy = np.arange(My) / My
    fz = np.arange(Mz) / Mz
    kxs = _band(params.B[0])
    kys = _band(params.B[1])
    xs = np.empty((kxs.size, Mx), dtype=complex)
    ys = np.empty((kys.size, My), dtype=complex)
    zs = np.empty((kxs.size, kys.size, Mz), dtype=complex)
    for b, ky in enumerate(kys):
        for a, kx in enumerate(kxs):
            x_part, y_part, z_part = _response_factors(fx, fy, fz, kx, ky, params, msyn, v)
            xs[a] = x_part
            ys[b] = y_part
            zs[a, b] = z_part
    Hf = np.einsum("ai,bj,abk->ijk", xs, ys, zs, optimize=True)
    return Hf / np.sqrt(float(params.total))


def transform_coeffs(H: np.ndarray, params: FilterParams) -> np.ndarray:
    """Örnek alanı katsayılarının birimsel DFT'si (standart DFT sırasında)"""
    if params.indexing == CENTERED:
        H = np.fft.ifftshift(H)
    return np.fft.fftn(H) / np.sqrt(float(params.total))


def apply_sample_domain(block: np.ndarray, H: np.ndarray) -> float:
    """Örnek alanında uygulama: Î(n - m̂) = sum_m H(m) * blok(m)"""
    if block.shape != H.shape:
        raise InvalidArgumentError(f"Blok {block.shape} ile katsayı {H.shape} uyumsuz")
    return float(np.sum(H * block))


def design_entry(params: FilterParams, msyn: Sequence[int], v: Velocity) -> FilterBankEntry:
    """Tek bir (m̂, v) için örnek ve frekans alanı katsayılarını tasarlar"""
    origin = tuple(int(item) for item in msyn)
    return FilterBankEntry(
        params=params,
        msyn_origin=origin,
        v=Velocity(float(v.vx), float(v.vy)),
        H=sample_coeffs(params, origin, v),
        Hf=freq_coeffs(params, origin, v),
    )
