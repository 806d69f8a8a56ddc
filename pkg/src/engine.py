#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Blok-FFT Beyazlatma Hattı
-------------------------
Bu modül, görüntü dizisini örtüşen analiz bloklarına böler, hız filtre bankasını
önceden tasarlar, her blok için hız kestirimine göre filtre seçer ve öngörü
hatası (PEF çıktısı) dizisini üretir.

Diziler ``(Nz, Ny, Nx)`` şeklindedir (x en hızlı); analiz blokları ise gecikme
indekslidir: pencere indeksi m, dizideki n - m örneğine karşılık gelir.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from numpy.lib.stride_tricks import sliding_window_view

import velocity
from errors import InvalidArgumentError, NumericError
from kernels import EDGE, FilterBankEntry, FilterParams, Velocity, design_entry, synthesis_indices
from velocity import VelocityField

logger = logging.getLogger(__name__)

MODE_3D = "3d"
MODE_2D = "2d"
MODES = (MODE_3D, MODE_2D)

# Sentez çıktısındaki sanal kısım için üst sınır
IMAG_TOL = 1e-6


@dataclass
class ImageSequence:
    """
    Gerçel değerli 3-B örnek dizisi

    Args:
        data: (Nz, Ny, Nx) dizisi
        mask: Geçerli örnek maskesi (None ise tümü geçerli)
        frame_rate_hint: Kare hızı bilgisi (opsiyonel)
    """

    data: np.ndarray
    mask: Optional[np.ndarray] = None
    frame_rate_hint: Optional[float] = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim == 2:
            self.data = self.data[None, :, :]
        if self.data.ndim != 3 or self.data.shape[0] < 1:
            raise InvalidArgumentError(f"Dizi 3 boyutlu olmalıdır: {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise NumericError("Dizide sonlu olmayan değerler var")
        if self.mask is not None:
            self.mask = np.asarray(self.mask, dtype=bool)
            if self.mask.shape != self.data.shape:
                raise InvalidArgumentError(f"Maske boyutu {self.mask.shape} uyumsuz")

    @property
    def N(self) -> Tuple[int, int, int]:
        Nz, Ny, Nx = self.data.shape
        return (Nx, Ny, Nz)

    @property
    def valid(self) -> np.ndarray:
        if self.mask is None:
            return np.ones(self.data.shape, dtype=bool)
        return self.mask


@dataclass(frozen=True)
class VelocityGrid:
    """Hız hipotezleri v = ĺ/Ĺz, ĺ = -Ĺxy..+Ĺxy (x ve y için)"""

    Lxy: int
    Lz: int

    def __post_init__(self):
        if int(self.Lxy) != self.Lxy or self.Lxy < 0:
            raise InvalidArgumentError(f"Ĺxy negatif olmayan tamsayı olmalıdır: {self.Lxy}")
        if int(self.Lz) != self.Lz or self.Lz < 1:
            raise InvalidArgumentError(f"Ĺz pozitif tamsayı olmalıdır: {self.Lz}")

    @property
    def values(self) -> np.ndarray:
        return np.arange(-self.Lxy, self.Lxy + 1) / self.Lz

    @property
    def size(self) -> int:
        return (2 * self.Lxy + 1) ** 2

    @property
    def step(self) -> float:
        return 1.0 / self.Lz

    def velocity(self, lx: int, ly: int) -> Velocity:
        return Velocity(lx / self.Lz, ly / self.Lz)

    def index(self, lx: int, ly: int) -> int:
        """Yığılmış banka dizisindeki satır numarası"""
        size = 2 * self.Lxy + 1
        return (lx + self.Lxy) * size + (ly + self.Lxy)


@dataclass
class BlockLayout:
    """Analiz bloklarının yerleşimi ve sentez kapsamı"""

    N: Tuple[int, int, int]
    params: FilterParams
    counts: Tuple[int, int, int]
    margin: Tuple[int, int, int]

    @property
    def analysis_dims(self) -> Tuple[int, int, int]:
        return self.params.M

    @property
    def synthesis_dims(self) -> Tuple[int, int, int]:
        return self.params.Msyn

    @property
    def stride(self) -> Tuple[int, int, int]:
        return self.params.Msyn

    @property
    def coverage(self) -> Tuple[int, int, int]:
        return tuple(c * s for c, s in zip(self.counts, self.params.Msyn))

    @property
    def analysis_origins(self) -> List[Tuple[int, int, int]]:
        """Her bloğun en yeni örneğinin (m = 0) dizi koordinatı (nx, ny, nz)"""
        origins = []
        for iz in range(self.counts[2]):
            for iy in range(self.counts[1]):
                for ix in range(self.counts[0]):
                    start = (ix, iy, iz)
                    origins.append(tuple(
                        start[d] * self.params.Msyn[d] + self.params.M[d] - 1 for d in range(3)
                    ))
        return origins

    def covered_slices(self) -> Tuple[slice, slice, slice]:
        """Sentez kapsamının (z, y, x) dilimleri"""
        cov = self.coverage
        return tuple(slice(self.margin[d], self.margin[d] + cov[d]) for d in (2, 1, 0))

    def covered_mask(self) -> np.ndarray:
        Nx, Ny, Nz = self.N
        mask = np.zeros((Nz, Ny, Nx), dtype=bool)
        mask[self.covered_slices()] = True
        return mask

    def coverage_counts(self) -> np.ndarray:
        """Her pikselin kaç sentez bloğu tarafından yazıldığı"""
        Nx, Ny, Nz = self.N
        counts = np.zeros((Nz, Ny, Nx), dtype=int)
        for origin in self.analysis_origins:
            lo = [origin[d] - self.params.M[d] + 1 + self.margin[d] for d in range(3)]
            hi = [lo[d] + self.params.Msyn[d] for d in range(3)]
            counts[lo[2]:hi[2], lo[1]:hi[1], lo[0]:hi[0]] += 1
        return counts


@dataclass
class SpectrumBlock:
    """Gecikme indeksli veri bloğunun birimsel yerel DFT'si"""

    S: np.ndarray
    origin: Tuple[int, int, int]


@dataclass
class FilterBank:
    """Hız ızgarasındaki her hipotez için önceden tasarlanmış filtreler"""

    params: FilterParams
    grid: VelocityGrid
    entries: Dict[Tuple[int, int], List[FilterBankEntry]]
    stacked: np.ndarray = field(repr=False)

    def rows(self, lx: np.ndarray, ly: np.ndarray) -> np.ndarray:
        """Seçilen hipotezlerin yığılmış dizideki satırları; tek hızlı bankada hep 0"""
        lx = np.asarray(lx, dtype=int)
        ly = np.asarray(ly, dtype=int)
        if self.grid.Lxy == 0:
            return np.zeros(np.broadcast(lx, ly).shape, dtype=int)
        if np.any(np.abs(lx) > self.grid.Lxy) or np.any(np.abs(ly) > self.grid.Lxy):
            raise InvalidArgumentError(f"Hipotez ızgara dışında: Lxy={self.grid.Lxy}")
        return self.grid.index(lx, ly)


def make_layout(N: Sequence[int], params: FilterParams) -> BlockLayout:
    """
    Analiz bloklarını, sentez blokları birbirine bitişik olacak şekilde yerleştirir

    Args:
        N: Dizi boyutları (Nx, Ny, Nz)
        params: Filtre parametreleri

    Returns:
        Blok yerleşimi
    """
    N = tuple(int(n) for n in N)
    if len(N) != 3:
        raise InvalidArgumentError(f"N üç bileşenli olmalıdır: {N}")
    if any(n < m for n, m in zip(N, params.M)):
        raise InvalidArgumentError(f"Dizi ({N}) analiz penceresinden ({params.M}) küçük")
    counts = tuple((n - m) // s + 1 for n, m, s in zip(N, params.M, params.Msyn))
    margin = tuple((m - s) // 2 for m, s in zip(params.M, params.Msyn))
    return BlockLayout(N=N, params=params, counts=counts, margin=margin)


def build_bank(params: FilterParams, grid: VelocityGrid,
               msyn_set: Optional[Sequence[Sequence[int]]] = None) -> FilterBank:
    """
    Izgaradaki her hız hipotezi için filtre katsayılarını önceden hesaplar

    Her hipotez için sentez kümesindeki her m̂z katmanına bir girdi tasarlanır;
    x/y sentez kaydırmaları, referans girdinin dairesel kaydırma modülasyonuyla
    elde edilir.

    Args:
        params: Filtre parametreleri
        grid: Hız ızgarası
        msyn_set: Sentez indeksleri (None ise pencerenin ortasındaki blok)

    Returns:
        Filtre bankası
    """
    if params.indexing != EDGE:
        raise InvalidArgumentError("Filtre bankası kenar indeksli pencere gerektirir")
    if msyn_set is None:
        msyn_set = synthesis_indices(params)
    msyn_set = [tuple(int(i) for i in item) for item in msyn_set]
    x0 = min(item[0] for item in msyn_set)
    y0 = min(item[1] for item in msyn_set)
    zs = sorted({item[2] for item in msyn_set})

    start = time.perf_counter()
    stacked = np.empty((grid.size, len(zs)) + params.M, dtype=complex)
    entries: Dict[Tuple[int, int], List[FilterBankEntry]] = {}
    for lx in range(-grid.Lxy, grid.Lxy + 1):
        for ly in range(-grid.Lxy, grid.Lxy + 1):
            row = grid.index(lx, ly)
            layer = []
            for j, mz in enumerate(zs):
                entry = design_entry(params, (x0, y0, mz), grid.velocity(lx, ly))
                stacked[row, j] = entry.Hf
                entry.Hf = stacked[row, j]
                layer.append(entry)
            entries[(lx, ly)] = layer
    logger.info("Filtre bankası hazır: %s, %d hipotez x %d katman (%.2f s)",
                params.label or params.M, grid.size, len(zs), time.perf_counter() - start)
    return FilterBank(params=params, grid=grid, entries=entries, stacked=stacked)


def fixed_velocity_bank(params: FilterParams, v: Velocity) -> FilterBank:
    """Tek hızlı banka; hız alanı dışarıdan sabitlendiğinde kullanılır"""
    msyn_set = synthesis_indices(params)
    x0 = min(item[0] for item in msyn_set)
    y0 = min(item[1] for item in msyn_set)
    zs = sorted({item[2] for item in msyn_set})
    layer = [design_entry(params, (x0, y0, mz), v) for mz in zs]
    stacked = np.stack([entry.Hf for entry in layer])[None]
    grid = VelocityGrid(Lxy=0, Lz=1)
    return FilterBank(params=params, grid=grid, entries={(0, 0): layer}, stacked=stacked)


def _extract_block(data: np.ndarray, origin: Sequence[int], M: Sequence[int]) -> np.ndarray:
    nx, ny, nz = origin
    Mx, My, Mz = M
    sub = data[nz - Mz + 1:nz + 1, ny - My + 1:ny + 1, nx - Mx + 1:nx + 1]
    return sub[::-1, ::-1, ::-1].transpose(2, 1, 0)


def _spectra(blocks: np.ndarray) -> np.ndarray:
    """Birimsel ileri DFT: S(k) = (1/sqrt(M)) sum_m exp(-j2pi k.m/M) blok(m)"""
    total = float(np.prod(blocks.shape[-3:]))
    return np.fft.fftn(blocks, axes=(-3, -2, -1)) / np.sqrt(total)


def local_spectrum(seq: ImageSequence, origin: Sequence[int], params: FilterParams) -> SpectrumBlock:
    """
    Başlangıcı n olan analiz bloğunun yerel DFT'si

    Args:
        seq: Görüntü dizisi
        origin: Bloğun en yeni örneğinin koordinatı (nx, ny, nz)
        params: Filtre parametreleri

    Returns:
        Spektrum bloğu
    """
    origin = tuple(int(o) for o in origin)
    for o, m, n in zip(origin, params.M, seq.N):
        if o - m + 1 < 0 or o >= n:
            raise InvalidArgumentError(f"Blok dizi sınırları dışında: origin={origin}, M={params.M}")
    block = _extract_block(seq.data, origin, params.M)
    return SpectrumBlock(S=_spectra(block), origin=origin)


def temporal_band_mask(Mz: int, Bz: int) -> np.ndarray:
    """kz = -Bz..+Bz (mod Mz) kutuları; tekrar eden kutu bir kez sayılır"""
    kz = np.fft.fftfreq(Mz) * Mz
    mask = np.abs(kz) <= Bz
    if Mz % 2 == 0 and Bz >= Mz // 2:
        mask[:] = True
    return mask


def _synthesize_batch(S: np.ndarray, Hf: np.ndarray, params: FilterParams,
                      eq15b_bz: Optional[int] = None) -> np.ndarray:
    """
    Bir m̂z katmanında tüm (m̂x, m̂y) sentez örnekleri, blok yığını için

    Args:
        S: (nb, Mx, My, Mz) spektrumlar
        Hf: (nb, Mx, My, Mz) referans m̂ için frekans katsayıları
        params: Filtre parametreleri
        eq15b_bz: Verilirse kz bandı kısaltılmış (yaklaşık) uygulama

    Returns:
        (nb, Ḿx, Ḿy) gerçel kestirim
    """
    Mx, My, _ = params.M
    Msx, Msy, _ = params.Msyn
    if eq15b_bz is None:
        T = np.sum(np.conj(Hf) * S, axis=-1)
        image = np.fft.ifft2(T, axes=(-2, -1)) * (Mx * My)
    else:
        keep = temporal_band_mask(params.M[2], eq15b_bz)
        # Eşlenik alınmamış H, +j işaretli spektrumla (gerçel girdide conj(S)) çarpılır
        T = np.sum(Hf[..., keep] * np.conj(S[..., keep]), axis=-1)
        image = np.fft.fft2(T, axes=(-2, -1))
    image = image[..., :Msx, :Msy]
    residue = float(np.max(np.abs(image.imag))) if image.size else 0.0
    if residue > IMAG_TOL * max(1.0, float(np.max(np.abs(image.real)))):
        logger.debug("Sentez çıktısında sanal artık: %.3g", residue)
    return image.real


def synthesize(spectrum: SpectrumBlock, entries: Sequence[FilterBankEntry],
               eq15b_bz: Optional[int] = None) -> np.ndarray:
    """
    Frekans alanında arka plan kestirimi: Î(n - m̂) = sum_k conj(H(k; m̂, v)) S(k; n)

    Args:
        spectrum: Yerel spektrum
        entries: Aynı hız için m̂z katmanı başına banka girdileri
        eq15b_bz: Kısaltılmış zaman bandı (None ise tam bant)

    Returns:
        (Ḿx, Ḿy, katman sayısı) gerçel dizi; indeks m̂ - m̂_referans
    """
    if isinstance(entries, FilterBankEntry):
        entries = [entries]
    params = entries[0].params
    if spectrum.S.shape != params.M:
        raise InvalidArgumentError(f"Spektrum {spectrum.S.shape}, beklenen {params.M}")
    layers = [_synthesize_batch(spectrum.S[None], entry.Hf[None], params, eq15b_bz)[0]
              for entry in entries]
    return np.stack(layers, axis=-1)


def _check_mode(params: FilterParams, mode: str) -> None:
    if mode not in MODES:
        raise InvalidArgumentError(f"Bilinmeyen mod: {mode}")
    if params.indexing != EDGE:
        raise InvalidArgumentError("Beyazlatma kenar indeksli pencere gerektirir")
    if mode == MODE_2D and not params.is_2d:
        raise InvalidArgumentError(f"2d modu Mz = 1 gerektirir: {params.M}")
    if mode == MODE_3D and params.M[2] < 2:
        raise InvalidArgumentError(f"3d modu Mz >= 2 gerektirir: {params.M}")


class _LayerProcessor:
    """Aynı z katmanındaki tüm blokları toplu olarak işler"""

    def __init__(self, data: np.ndarray, layout: BlockLayout, grid: VelocityGrid, mode: str,
                 bank: Optional[FilterBank], eq15b_bz: Optional[int],
                 fixed_velocity: Optional[Velocity]):
        self.data = data
        self.layout = layout
        self.params = layout.params
        self.grid = grid
        self.mode = mode
        self.bank = bank
        self.eq15b_bz = eq15b_bz
        self.fixed_velocity = fixed_velocity
        self.zs = sorted({item[2] for item in synthesis_indices(self.params)})

    def _blocks(self, z0: int) -> np.ndarray:
        Mx, My, Mz = self.params.M
        Msx, Msy, _ = self.params.Msyn
        nbx, nby, _ = self.layout.counts
        slab = self.data[z0:z0 + Mz]
        windows = sliding_window_view(slab, (My, Mx), axis=(1, 2))[:, ::Msy, ::Msx]
        windows = windows[:, :nby, :nbx]
        blocks = windows[::-1, :, :, ::-1, ::-1].transpose(1, 2, 4, 3, 0)
        return np.ascontiguousarray(blocks).reshape((nby * nbx,) + self.params.M)

    def _frame_windows(self, z: int) -> np.ndarray:
        Mx, My, _ = self.params.M
        Msx, Msy, _ = self.params.Msyn
        nbx, nby, _ = self.layout.counts
        windows = sliding_window_view(self.data[z], (My, Mx))[::Msy, ::Msx][:nby, :nbx]
        return windows.reshape((nby * nbx, My, Mx))

    def _select(self, z0: int, S: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        nb = S.shape[0]
        band = (self.params.B[0], self.params.B[1])
        if self.fixed_velocity is not None:
            zeros = np.zeros(nb, dtype=int)
            return zeros, zeros, np.ones(nb, dtype=bool)
        if self.mode == MODE_3D:
            values = velocity.slice_values(velocity.power_spectrum(S), self.grid, lz=1, band=band)
            lx, ly = velocity.select_hypotheses(values, self.grid)
            return lx, ly, np.ones(nb, dtype=bool)
        if z0 < 1:
            # İlk karenin öncülü yok; Mz = 1 filtreleri hızdan bağımsızdır
            zeros = np.zeros(nb, dtype=int)
            return zeros, zeros, np.zeros(nb, dtype=bool)
        values = velocity.cross_values(self._frame_windows(z0), self._frame_windows(z0 - 1),
                                       self.grid, band=band)
        lx, ly = velocity.select_hypotheses(values, self.grid)
        return lx, ly, np.ones(nb, dtype=bool)

    def __call__(self, iz: int, synthesize_output: bool = True) -> dict:
        Mx, My, Mz = self.params.M
        Msx, Msy, _ = self.params.Msyn
        nbx, nby, _ = self.layout.counts
        z0 = iz * self.params.Msyn[2]
        blocks = self._blocks(z0)
        S = _spectra(blocks)
        lx, ly, valid = self._select(z0, S)
        result = {"iz": iz, "z0": z0, "lx": lx.reshape(nby, nbx), "ly": ly.reshape(nby, nbx),
                  "valid": valid.reshape(nby, nbx), "planes": []}
        if not synthesize_output:
            return result

        rows = self.bank.rows(lx, ly)
        mx0 = (Mx - Msx) // 2
        my0 = (My - Msy) // 2
        for j, mz in enumerate(self.zs):
            estimate = _synthesize_batch(S, self.bank.stacked[rows, j], self.params, self.eq15b_bz)
            residual = blocks[:, mx0:mx0 + Msx, my0:my0 + Msy, mz] - estimate
            # (m̂x, m̂y) -> dizi yönü (y, x): indeksler ters çevrilir
            residual = residual[:, ::-1, ::-1].reshape(nby, nbx, Msx, Msy)
            plane = residual.transpose(0, 3, 1, 2).reshape(nby * Msy, nbx * Msx)
            result["planes"].append((z0 + Mz - 1 - mz, plane))
        return result


def _run_layers(seq: ImageSequence, params: FilterParams, grid: VelocityGrid, mode: str,
                bank: Optional[FilterBank], eq15b_bz: Optional[int],
                fixed_velocity: Optional[Velocity], threads: int,
                synthesize_output: bool) -> Tuple[BlockLayout, List[dict]]:
    _check_mode(params, mode)
    layout = make_layout(seq.N, params)
    processor = _LayerProcessor(seq.data, layout, grid, mode, bank, eq15b_bz, fixed_velocity)
    jobs = (delayed(processor)(iz, synthesize_output) for iz in range(layout.counts[2]))
    results = Parallel(n_jobs=max(1, int(threads)), prefer="threads")(jobs)
    return layout, results


def _velocity_field(seq: ImageSequence, layout: BlockLayout, grid: VelocityGrid,
                    results: List[dict], fixed_velocity: Optional[Velocity]) -> VelocityField:
    params = layout.params
    Msx, Msy, Msz = params.Msyn
    field_ = VelocityField.empty(seq.data.shape)
    zs, ys, xs = layout.covered_slices()
    for result in results:
        if fixed_velocity is not None:
            vx = np.full(result["lx"].shape, float(fixed_velocity.vx))
            vy = np.full(result["ly"].shape, float(fixed_velocity.vy))
        else:
            vx = result["lx"] / grid.Lz
            vy = result["ly"] / grid.Lz

        def expand(values):
            return np.repeat(np.repeat(values, Msy, axis=0), Msx, axis=1)

        t0 = zs.start + result["iz"] * Msz
        for t in range(t0, t0 + Msz):
            field_.vx[t, ys, xs] = expand(vx)
            field_.vy[t, ys, xs] = expand(vy)
            field_.mask[t, ys, xs] = expand(result["valid"])
    field_.vx[~field_.mask] = 0.0
    field_.vy[~field_.mask] = 0.0
    return field_


def estimate_flow(seq: ImageSequence, params: FilterParams, grid: VelocityGrid,
                  mode: str = MODE_3D, threads: int = 1) -> VelocityField:
    """
    Yalnızca hız alanı: her analiz bloğu için v̂, sentez bloğuna yayılmış

    Args:
        seq: Görüntü dizisi
        params: Filtre parametreleri
        grid: Hız ızgarası
        mode: "3d" (öz ilinti) veya "2d" (ardışık kare çapraz ilintisi)
        threads: İş parçacığı sayısı

    Returns:
        Hız alanı (kapsam dışı pikseller maskeli)
    """
    layout, results = _run_layers(seq, params, grid, mode, None, None, None, threads, False)
    return _velocity_field(seq, layout, grid, results, None)


def whiten(seq: ImageSequence, params: FilterParams, grid: VelocityGrid, mode: str = MODE_3D,
           bank: Optional[FilterBank] = None, eq15b_bz: Optional[int] = None,
           fixed_velocity: Optional[Velocity] = None,
           threads: int = 1) -> Tuple[ImageSequence, VelocityField]:
    """
    Öngörü hatası filtresiyle arka planı beyazlatır

    Her analiz bloğu için hız kestirilir, bankadan uygun filtre seçilir ve sentez
    bloğunda J = I - Î hesaplanır. Kenar şeritleri 0 yazılır ve maskelenir.

    Args:
        seq: Girdi dizisi
        params: Filtre parametreleri
        grid: Hız ızgarası
        mode: "3d" veya "2d"
        bank: Önceden hesaplanmış banka (None ise burada tasarlanır)
        eq15b_bz: Kısaltılmış zaman bandı (None ise tam bant uygulaması)
        fixed_velocity: Verilirse kestirim atlanır, tüm bloklar bu hızı kullanır
        threads: İş parçacığı sayısı (çıktı bundan bağımsızdır)

    Returns:
        (artık dizi, hız alanı)
    """
    start = time.perf_counter()
    if fixed_velocity is not None:
        bank = fixed_velocity_bank(params, Velocity(float(fixed_velocity.vx), float(fixed_velocity.vy)))
    elif bank is None:
        bank = build_bank(params, grid)
    elif bank.params != params or bank.grid != grid:
        raise InvalidArgumentError("Filtre bankası parametreleri uyumsuz")

    layout, results = _run_layers(seq, params, grid, mode, bank, eq15b_bz, fixed_velocity,
                                  threads, True)
    residual = np.zeros(seq.data.shape)
    mask = np.zeros(seq.data.shape, dtype=bool)
    _, ys, xs = layout.covered_slices()
    for result in results:
        for t, plane in result["planes"]:
            residual[t, ys, xs] = plane
            mask[t, ys, xs] = True
    if not np.all(np.isfinite(residual)):
        raise NumericError("Beyazlatma çıktısında sonlu olmayan değerler var")

    field_ = _velocity_field(seq, layout, grid, results, fixed_velocity)
    elapsed = time.perf_counter() - start
    logger.info("Beyazlatma: %s, %d blok, kenar %s, %.4f s/kare",
                params.label or params.M, int(np.prod(layout.counts)), layout.margin,
                elapsed / seq.N[2])
    return ImageSequence(data=residual, mask=mask, frame_rate_hint=seq.frame_rate_hint), field_
