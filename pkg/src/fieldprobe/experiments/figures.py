"""Plotting-ready tables for each figure, with desk-scale presets."""

import os

from ..errors import ConfigError
from .config import resolve
from .runner import run

FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7")

# sites per side for the near-critical presets
_SITES = {1: 101, 2: 15, 3: 7}
_AREA_FRACTIONS = {
    1: "0.1, 0.2, 0.3, 0.4, 0.5",
    2: "1/5, 1/3, 7/15, 3/5",
    3: "2/7, 3/7",
}
_CONTINUUM_UV = {1: "25, 50, 100", 2: "4, 7, 10"}


def preset(kind, dim=1):
    """``(experiment kind, raw parameters)`` behind a figure."""
    near_critical = {"dim": dim, "sites_per_side": _SITES.get(dim), "near_critical": "true"}
    if kind == "fig1":
        return "profile", {**near_critical, "region_fraction": "1/3", "modes": 1, "include_partner": "true"}
    if kind == "fig2":
        counts = "full, 2, boundary" if dim == 1 else "full, boundary"
        return "area_law", {**near_critical, "region_fractions": _AREA_FRACTIONS.get(dim), "mode_counts": counts}
    if kind == "fig3":
        # fixed box length and fixed mass m = 1/L while the cutoff varies
        return "convergence", {"dim": dim, "uv_values": "12, 25, 50, 100", "region_fraction": "1/3"}
    if kind in ("fig4", "fig5", "fig6", "fig7"):
        dim = 1 if kind in ("fig4", "fig5") else 2
        return "continuum_profile", {
            "dim": dim,
            "uv_values": _CONTINUUM_UV[dim],
            "region_fraction": "1/3",
            "partner": "true" if kind in ("fig5", "fig7") else "false",
        }
    raise ConfigError(f"unknown figure; expected one of {', '.join(FIGURES)}", "figure")


def parse_overrides(items):
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"override {item!r} is not key=value", "override")
        out[key.strip()] = value.strip()
    return out


def figure_config(kind, overrides=None):
    overrides = dict(overrides or {})
    dim = int(overrides.get("dim", 1))
    exp_kind, raw = preset(kind, dim)
    raw = {**raw, **overrides}
    if "uv_n" in overrides:
        raw.pop("sites_per_side", None)
    if "mass" in overrides:
        raw.pop("near_critical", None)
    raw.setdefault("output", f"{kind}.{raw.get('format', 'csv')}")
    return resolve(exp_kind, raw, section=kind)


def emit_figure_data(kind, overrides=None, output_dir="."):
    """Write the table for figure ``kind``; returns ``(exit_status, path)``."""
    cfg = figure_config(kind, overrides)
    path = os.path.join(output_dir, cfg.output)
    return run(cfg, path)
