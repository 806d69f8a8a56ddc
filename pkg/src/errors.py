#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Hata Sınıfları
--------------
Bu modül, kütüphane genelinde kullanılan hata sınıflarını tanımlar.
Komut satırı arayüzü bu sınıfları çıkış kodlarına eşler.
"""


class StpefError(Exception):
    """Tüm kütüphane hatalarının temel sınıfı"""


class InvalidArgumentError(StpefError, ValueError):
    """Geçersiz argüman (boyut uyumsuzluğu, sınır dışı blok, boş maske vb.)"""


class ConfigError(InvalidArgumentError):
    """Filtre yapılandırma dosyası hatası"""


class NumericError(StpefError):
    """Sonlu olmayan (NaN/Inf) değer üretildi veya alındı"""


class SequenceFormatError(StpefError):
    """Dosya biçimi hatalarının temel sınıfı"""

    code = 0


class BadMagicError(SequenceFormatError):
    """Dosya başlığındaki sihirli dizge tanınmadı"""

    code = 1


class TruncatedFileError(SequenceFormatError):
    """Dosya beklenenden kısa"""

    code = 2


class UnknownDtypeError(SequenceFormatError):
    """Bilinmeyen veri tipi kodu"""

    code = 3


class TrailingDataError(SequenceFormatError):
    """Dosyada başlığın bildirdiği boyuttan sonra fazladan bayt var"""

    code = 4
