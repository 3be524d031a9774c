"""Execute experiment configs and write their tables."""

import datetime
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from .. import continuum as ct
from .. import gaussian as gq
from .. import probes
from ..errors import ConfigError, DomainError, FieldProbeError, IndexOutOfRange, UnstableHamiltonian
from ..io import write_csv, write_json
from ..lattice import LatticeSpec, ground_state
from ..regions import Region, normal_modes, partner_mode, reduce

WORKERS_ENV = "FIELDPROBE_WORKERS"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_INVARIANT = 4


@dataclass
class Table:
    header: list
    rows: list
    metadata: dict = field(default_factory=dict)
    ok: bool = True


def worker_count(config):
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            count = int(env)
        except ValueError:
            raise ConfigError(f"not an integer: {env!r}", WORKERS_ENV) from None
        if count < 1:
            raise ConfigError("must be at least 1", WORKERS_ENV)
        return count
    return config.get("workers", os.cpu_count() or 1)


def _map(config, func, items):
    """Apply ``func`` to ``items`` on the worker pool, keeping input order."""
    items = list(items)
    workers = min(worker_count(config), max(len(items), 1))
    if workers == 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def _region(lattice, cfg, fraction_key="region_fraction"):
    if cfg.get("region_sites") is not None:
        return Region.from_sites(lattice, cfg["region_sites"])
    if cfg.get("region_side") is not None:
        return Region.hypercube(lattice, side=cfg["region_side"])
    return Region.hypercube(lattice, side_fraction=cfg[fraction_key])


def _profile(cfg):
    lat = cfg.lattice()
    sigma = ground_state(lat)
    region = _region(lat, cfg)
    modes = normal_modes(sigma, region)
    count = min(cfg["modes"], len(region))
    header = ["role", "rank", "site_index", *[f"x{r}" for r in range(lat.dim)], "g", "f", "F"]
    rows = []

    def emit(role, rank, mode):
        coords = mode.support.coordinates()
        for site, c, g, f in zip(mode.support.site_indices, coords, mode.position_coeffs, mode.momentum_coeffs):
            rows.append((role, rank, site, *map(int, c), g, f, f * g))

    for rank in range(count):
        emit("region", rank, modes[rank])
    if cfg["include_partner"]:
        for rank in range(count):
            emit("partner", rank, partner_mode(sigma, region, rank))
    meta = {"eigenvalues": modes.eigenvalues[:count].tolist(), "omega": lat.omega, "alpha": lat.alpha}
    return Table(header, rows, meta)


def _area_law(cfg):
    lat = cfg.lattice()
    sigma = ground_state(lat)
    target = cfg["saturation_target"]

    def point(fraction):
        region = Region.hypercube(lat, side_fraction=fraction)
        nu = gq.symplectic_spectrum(reduce(sigma, region))
        terms = gq.mode_entropy(nu)
        total = float(terms.sum())
        n_b = region.num_boundary_sites
        needed = int(np.argmax(np.cumsum(terms) >= target * total * (1 - 1e-12))) + 1 if total > 0 else 0
        side = int(round(len(region) ** (1 / lat.dim)))
        out = []
        for label in cfg["mode_counts"]:
            used = {"full": len(region), "boundary": n_b}.get(label, label)
            used = min(int(used), len(region))
            captured = float(terms[:used].sum())
            ratio = captured / total if total > 0 else 1.0
            out.append(
                (fraction, side, len(region), n_b, str(label), used, captured, total, ratio, needed, needed / len(region))
            )
        return out

    header = [
        "region_fraction",
        "region_side",
        "region_sites",
        "boundary_sites",
        "mode_count",
        "modes_used",
        "entropy",
        "full_entropy",
        "ratio",
        "modes_for_target",
        "fraction_of_modes_for_target",
    ]
    rows = [r for block in _map(cfg, point, cfg["region_fractions"]) for r in block]
    return Table(header, rows, {"omega": lat.omega, "alpha": lat.alpha})


def _convergence(cfg):
    mass = cfg.get("mass", 1.0 / cfg["box_length"])

    def point(n):
        lat = LatticeSpec(cfg["dim"], 2 * n + 1, cfg["box_length"], mass)
        return ct.region_entropy(lat, cfg["region_fraction"])

    values = _map(cfg, point, cfg["uv_values"])
    rows, prev = [], None
    for n, s in zip(cfg["uv_values"], values):
        rows.append((n, s, float("nan") if prev is None else s - prev))
        prev = s
    return Table(["N", "entropy", "delta"], rows, {"mass": mass})


def _bound_mc(cfg):
    lat = cfg.lattice()
    sigma = ground_state(lat)
    region = _region(lat, cfg)
    runner = probes.BoundTrials(sigma, region)
    for k in cfg["k"]:
        runner.bound(k)  # fill the cache before threads read it
    jobs = [(k, s) for k in cfg["k"] for s in cfg["seeds"]]
    reports = _map(cfg, lambda job: runner.trial(job[0], job[1], cfg["intensity"], cfg["basis"]), jobs)
    rows = [(r.seed, r.k, r.trial_negativity, r.bound_value, r.margin) for r in reports]
    worst = max(r.margin for r in reports)
    violations = sum(not r.passed for r in reports)
    meta = {"region_sites": list(region.site_indices), "max_margin": worst, "violations": violations}
    return Table(probes.TRIAL_HEADER, rows, meta, ok=violations == 0)


def _grid(lat, points_per_site):
    axis = np.arange(lat.sites_per_side * points_per_site) * (lat.spacing / points_per_site)
    mesh = np.meshgrid(*([axis] * lat.dim), indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=-1)


def _continuum_profile(cfg):
    mass = cfg.get("mass", 1.0 / cfg["box_length"])

    def point(n):
        lat = LatticeSpec(cfg["dim"], 2 * n + 1, cfg["box_length"], mass)
        sigma = ground_state(lat)
        region = Region.hypercube(lat, side_fraction=cfg["region_fraction"])
        if cfg["partner"]:
            mode = partner_mode(sigma, region, cfg["rank"])
        else:
            mode = normal_modes(sigma, region)[cfg["rank"]]
        prof = ct.reconstruct_profile(mode, cfg["lambda_q"], cfg["lambda_p"])
        pts = _grid(lat, cfg["points_per_site"])
        fn, gn, mask = prof.sample(pts, truncate=cfg["truncate"])
        return [(n, *p, a, b, int(t)) for p, a, b, t in zip(pts, fn, gn, mask)]

    header = ["N", *ct.sample_header(cfg["dim"])]
    rows = [r for block in _map(cfg, point, cfg["uv_values"]) for r in block]
    return Table(header, rows, {"mass": mass})


def _counterexample(cfg):
    rep = probes.counterexample_abc(cfg["nu_strong"], cfg["nu_weak"], cfg["swap_bc"])
    header = [
        "nu_strong",
        "nu_weak",
        "swap_bc",
        "most_mixed",
        "degenerate",
        "negativity_a1_b",
        "negativity_a2_b",
        "expected_a2_b",
    ]
    row = (
        rep.nu_strong,
        rep.nu_weak,
        int(cfg["swap_bc"]),
        rep.most_mixed or "ambiguous",
        int(rep.degenerate),
        rep.negativity_a1_b,
        rep.negativity_a2_b,
        rep.expected_a2_b,
    )
    return Table(header, [row])


def _verify(cfg):
    from .verify import run_checks

    results = run_checks(quick=cfg["quick"])
    rows = [(r.name, int(r.passed), r.value, r.tolerance) for r in results]
    return Table(["check", "passed", "value", "tolerance"], rows, ok=all(r.passed for r in results))


HANDLERS = {
    "profile": _profile,
    "area_law": _area_law,
    "convergence": _convergence,
    "bound_mc": _bound_mc,
    "continuum_profile": _continuum_profile,
    "counterexample": _counterexample,
    "verify": _verify,
}


def execute(config):
    """Compute the table for one config without writing anything."""
    return HANDLERS[config.kind](config)


def metadata_for(config, table, timestamp=True):
    meta = {"tool": "fieldprobe", "version": __version__, "kind": config.kind, "config": config.to_dict()}
    meta.update(table.metadata)
    if timestamp:
        meta["created"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return meta


def write_table(config, table, path=None, timestamp=True):
    path = path or config.output
    meta = metadata_for(config, table, timestamp)
    if config["format"] == "json":
        write_json(path, table.header, table.rows, meta)
    else:
        write_csv(path, table.header, table.rows, meta)
    return path


def run(config, path=None, timestamp=True):
    """Execute and write one config. Returns ``(exit_status, output_path)``."""
    table = execute(config)
    out = write_table(config, table, path, timestamp)
    return (EXIT_OK if table.ok else EXIT_INVARIANT), out


def exit_status_for(exc):
    """Exit code for an exception escaping :func:`run`; unknown errors re-raise."""
    # bad parameter values surface as domain errors once the lattice is built
    if isinstance(exc, (ConfigError, DomainError, IndexOutOfRange, UnstableHamiltonian)):
        return EXIT_CONFIG
    if isinstance(exc, (FieldProbeError, np.linalg.LinAlgError, ArithmeticError)):
        return EXIT_NUMERICAL
    raise exc
