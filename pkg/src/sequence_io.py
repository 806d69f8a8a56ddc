#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Dosya Biçimleri
---------------
Diziler, hız alanları, veri kümeleri ve ölçüm raporları için bit düzeyinde
tekrarlanabilir dosya biçimleri ve inceleme amaçlı PGM dışa aktarımı.

ISEQ1: "ISEQ1\\0" | Nx, Ny, Nz (<u4) | dtype (<u1) | Nz kare, x en hızlı
VFLD1: "VFLD1\\0" | Nx, Ny, Nz (<u4) | kare başına vx (<f4), vy (<f4), maske (<u1)
"""

import json
import logging
import os
import struct
from typing import List, Optional

import numpy as np
import pandas as pd

from engine import ImageSequence
from errors import (
    BadMagicError, SequenceFormatError, TrailingDataError, TruncatedFileError, UnknownDtypeError
)
from kernels import Velocity
from metrics import MetricsReport
from scenesim import Dataset, TargetTrajectory
from velocity import VelocityField

logger = logging.getLogger(__name__)

SEQUENCE_MAGIC = b"ISEQ1\0"
FIELD_MAGIC = b"VFLD1\0"
SEQUENCE_HEADER = struct.Struct("<6sIIIB")
FIELD_HEADER = struct.Struct("<6sIII")

DTYPE_FLOAT32 = 0
DTYPE_UINT8 = 1
DTYPES = {DTYPE_FLOAT32: np.dtype("<f4"), DTYPE_UINT8: np.dtype("<u1")}

MANIFEST = "manifest.json"
FIXED_RANGE = (-3.0, 3.0)


def _read_bytes(path: str) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def _unpack_header(raw: bytes, header: struct.Struct, magic: bytes, path: str) -> tuple:
    if raw[:len(magic)] != magic:
        raise BadMagicError(f"Tanınmayan dosya başlığı: {path}")
    if len(raw) < header.size:
        raise TruncatedFileError(f"Başlık eksik: {path}")
    return header.unpack_from(raw)


def _payload(raw: bytes, header: struct.Struct, expected: int, path: str) -> bytes:
    """Başlıktan sonraki veri; boyutu başlıktaki boyutlarla tam eşleşmelidir"""
    payload = raw[header.size:]
    if len(payload) < expected:
        raise TruncatedFileError(f"Veri eksik ({len(payload)}/{expected} bayt): {path}")
    if len(payload) > expected:
        raise TrailingDataError(f"Fazladan {len(payload) - expected} bayt: {path}")
    return payload


def write_sequence(path: str, seq: ImageSequence, dtype_code: int = DTYPE_FLOAT32) -> None:
    """Diziyi ISEQ1 biçiminde yazar"""
    if dtype_code not in DTYPES:
        raise UnknownDtypeError(f"Bilinmeyen veri tipi kodu: {dtype_code}")
    Nx, Ny, Nz = seq.N
    payload = np.ascontiguousarray(seq.data, dtype=DTYPES[dtype_code]).tobytes()
    with open(path, "wb") as f:
        f.write(SEQUENCE_HEADER.pack(SEQUENCE_MAGIC, Nx, Ny, Nz, dtype_code))
        f.write(payload)


def _read_sequence_array(path: str) -> np.ndarray:
    raw = _read_bytes(path)
    _, Nx, Ny, Nz, dtype_code = _unpack_header(raw, SEQUENCE_HEADER, SEQUENCE_MAGIC, path)
    if dtype_code not in DTYPES:
        raise UnknownDtypeError(f"Bilinmeyen veri tipi kodu {dtype_code}: {path}")
    dtype = DTYPES[dtype_code]
    payload = _payload(raw, SEQUENCE_HEADER, Nx * Ny * Nz * dtype.itemsize, path)
    return np.frombuffer(payload, dtype=dtype).reshape(Nz, Ny, Nx)


def read_sequence(path: str, mask_path: Optional[str] = None) -> ImageSequence:
    """
    ISEQ1 dosyasını okur

    Args:
        path: Dizi dosyası
        mask_path: Geçerlilik maskesi (uint8 ISEQ1), opsiyonel

    Returns:
        Görüntü dizisi
    """
    data = _read_sequence_array(path).astype(float)
    mask = None
    if mask_path is not None:
        mask = read_mask(mask_path)
        if mask.shape != data.shape:
            raise SequenceFormatError(f"Maske {mask.shape} ile dizi {data.shape} uyumsuz")
    return ImageSequence(data=data, mask=mask)


def write_mask(path: str, mask: np.ndarray) -> None:
    write_sequence(path, ImageSequence(data=np.asarray(mask, dtype=float)), DTYPE_UINT8)


def read_mask(path: str) -> np.ndarray:
    values = _read_sequence_array(path)
    if np.any(values > 1):
        raise SequenceFormatError(f"Maske yalnızca 0/1 içerebilir: {path}")
    return values.astype(bool)


def write_field(path: str, field_: VelocityField) -> None:
    """Hız alanını VFLD1 biçiminde yazar"""
    Nz, Ny, Nx = field_.shape
    with open(path, "wb") as f:
        f.write(FIELD_HEADER.pack(FIELD_MAGIC, Nx, Ny, Nz))
        for t in range(Nz):
            f.write(np.ascontiguousarray(field_.vx[t], dtype="<f4").tobytes())
            f.write(np.ascontiguousarray(field_.vy[t], dtype="<f4").tobytes())
            f.write(np.ascontiguousarray(field_.mask[t], dtype="<u1").tobytes())


def read_field(path: str) -> VelocityField:
    """VFLD1 dosyasını okur"""
    raw = _read_bytes(path)
    _, Nx, Ny, Nz = _unpack_header(raw, FIELD_HEADER, FIELD_MAGIC, path)
    plane = Nx * Ny
    frame_bytes = plane * (4 + 4 + 1)
    payload = _payload(raw, FIELD_HEADER, Nz * frame_bytes, path)
    record = np.dtype([("vx", "<f4", (Ny, Nx)), ("vy", "<f4", (Ny, Nx)), ("mask", "<u1", (Ny, Nx))])
    frames = np.frombuffer(payload, dtype=record)
    if np.any(frames["mask"] > 1):
        raise SequenceFormatError(f"Maske yalnızca 0/1 içerebilir: {path}")
    return VelocityField(vx=frames["vx"].astype(float), vy=frames["vy"].astype(float),
                         mask=frames["mask"].astype(bool))


def pgm_levels(frame: np.ndarray, scaling: str = "minmax",
               fixed_range: tuple = FIXED_RANGE) -> np.ndarray:
    """
    Kareyi 8 bit gri seviyelere ölçekler

    minmax: [min, max] -> [0, 255]; sabit karede tümü 128.
    fixed: [lo, hi] -> [0, 255], aralık dışı kırpılır.
    """
    frame = np.asarray(frame, dtype=float)
    if scaling == "minmax":
        lo, hi = float(frame.min()), float(frame.max())
        if hi == lo:
            return np.full(frame.shape, 128, dtype=np.uint8)
    elif scaling == "fixed":
        lo, hi = float(fixed_range[0]), float(fixed_range[1])
        if not hi > lo:
            raise SequenceFormatError(f"Geçersiz sabit aralık: {fixed_range}")
    else:
        raise SequenceFormatError(f"Bilinmeyen ölçekleme: {scaling}")
    levels = np.floor((frame - lo) / (hi - lo) * 255.0 + 0.5)
    return np.clip(levels, 0, 255).astype(np.uint8)


def export_pgm(path: str, seq: ImageSequence, frame: int, scaling: str = "minmax",
               fixed_range: tuple = FIXED_RANGE) -> None:
    """Tek bir kareyi ikili PGM (P5) olarak dışa aktarır"""
    Nx, Ny, Nz = seq.N
    if not 0 <= frame < Nz:
        raise SequenceFormatError(f"Kare indeksi aralık dışında: {frame} (Nz={Nz})")
    levels = pgm_levels(seq.data[frame], scaling, fixed_range)
    with open(path, "wb") as f:
        f.write(f"P5\n{Nx} {Ny}\n255\n".encode("ascii"))
        f.write(levels.tobytes())


def write_metrics_csv(path: str, report: MetricsReport) -> None:
    """Başlık satırı, küme başına bir satır ve bir toplu satır"""
    report.to_frame().to_csv(path, index=False)


def read_metrics_csv(path: str) -> pd.DataFrame:
    frame = pd.read_csv(path, keep_default_na=False,
                        na_values={"scr_db": [""], "rms_velocity_error": [""]},
                        dtype={"config": str, "dataset": str, "scenario": str},
                        float_precision="round_trip")
    return frame.astype({"seed": int, "scr_db": float, "rms_velocity_error": float})


def write_dataset(directory: str, datasets: List[Dataset]) -> str:
    """
    Veri kümelerini dizine yazar: dizi, yer gerçeği hız alanı ve manifest.json

    Returns:
        Manifest dosyasının yolu
    """
    os.makedirs(directory, exist_ok=True)
    entries = []
    for dataset in datasets:
        name = dataset.name
        write_sequence(os.path.join(directory, f"{name}.iseq"), dataset.seq)
        write_field(os.path.join(directory, f"{name}_truth.vfld"), dataset.truth_field)
        v = dataset.background_velocity
        entries.append({
            "name": name,
            "scenario": dataset.scenario,
            "seed": dataset.seed,
            "noise_sigma": dataset.noise_sigma,
            "N": list(dataset.seq.N),
            "sequence": f"{name}.iseq",
            "truth": f"{name}_truth.vfld",
            "background_velocity": None if v is None else [v.vx, v.vy],
            "target": None if dataset.target is None else dataset.target.to_dict(),
        })
    manifest_path = os.path.join(directory, MANIFEST)
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump({"datasets": entries}, f, ensure_ascii=False, indent=2)
    logger.info("%d veri kümesi yazıldı: %s", len(entries), directory)
    return manifest_path


def read_manifest(directory: str) -> List[dict]:
    with open(os.path.join(directory, MANIFEST), "r", encoding="utf-8") as f:
        manifest = json.load(f)
    if "datasets" not in manifest:
        raise SequenceFormatError(f"Manifest veri kümesi listesi içermiyor: {directory}")
    return manifest["datasets"]


def read_dataset(directory: str) -> List[Dataset]:
    """write_dataset ile yazılmış dizini okur"""
    datasets = []
    for entry in read_manifest(directory):
        seq = read_sequence(os.path.join(directory, entry["sequence"]))
        truth = read_field(os.path.join(directory, entry["truth"]))
        target = None
        if entry.get("target") is not None:
            target = TargetTrajectory.from_dict(entry["target"], entry["N"])
        v = entry.get("background_velocity")
        datasets.append(Dataset(
            seq=seq,
            scenario=entry["scenario"],
            truth_field=truth,
            target=target,
            seed=int(entry["seed"]),
            noise_sigma=float(entry["noise_sigma"]),
            background_velocity=None if v is None else Velocity(float(v[0]), float(v[1])),
        ))
    return datasets
