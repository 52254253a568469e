"""Paths to data files bundled with the package."""

from __future__ import annotations

from importlib import resources


def _path(name: str) -> str:
    return str(resources.files("psibound").joinpath("data", name))


def zeta_config_path() -> str:
    return _path("zeta.cfg")


def ktable_path() -> str:
    return _path("ktable.cfg")


def mtable_path() -> str:
    return _path("mtable.cfg")


def zeros_path() -> str:
    return _path("zeros_2000.txt")
