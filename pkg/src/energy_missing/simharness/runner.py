"""Execution of scenario cells, the wine-population study and run manifests."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..distributions import Dgp
from ..exceptions import EnergyMissingError
from ..missingness import MissingnessSpec
from ..resampling import study_procedures, warp_speed_study
from .scenario import CellGenerator, Population, PopulationSource, ScenarioSpec, load_population

# legend order: left column, then right column; None is the missForest slot
LEGEND_LEFT = ("cc_alg1", "cc_alg2", "w_alg1", "w_alg2")
LEGEND_RIGHT = ("mean", "median", "6nn", None)
MISSFOREST = "missforest"


@dataclass
class CellResult:
    x: str
    y: str
    index: int
    seed: tuple
    rates: dict = field(default_factory=dict)
    missing_x: Optional[float] = None
    missing_y: Optional[float] = None
    status: str = "ok"
    error: str = ""
    runtime: float = 0.0

    @property
    def ok(self):
        return self.status == "ok"

    def percent(self, label):
        rate = self.rates.get(label)
        return None if rate is None else 100.0 * rate


@dataclass
class PowerTable:
    name: str
    x_labels: list
    y_labels: list
    cells: list
    logistic: bool = False

    def cell(self, x, y):
        for c in self.cells:
            if c.x == x and c.y == y:
                return c
        return None

    @property
    def failed(self):
        return [c for c in self.cells if not c.ok]


def _average_missing(rates, spec: MissingnessSpec):
    cols = spec.incomplete_columns
    if cols is not None:
        rates = rates[list(cols)]
    return float(100.0 * np.mean(rates))


def _resolve(source, cache):
    if isinstance(source, PopulationSource):
        if source.path not in cache:
            cache[source.path] = load_population(source)
        return cache[source.path]
    return source


def resolve_sources(spec: ScenarioSpec):
    """Load every population a scenario refers to (once per file)."""
    cache = {}
    return {label: _resolve(src, cache) for label, src in spec.sources.items()}


def run_cell(spec: ScenarioSpec, index, jobs=None, sources=None) -> CellResult:
    """Warp-speed rejection rates for cell ``spec.pairs[index]``.

    Replicate ``b`` is seeded from ``(spec.seed, i, j, b)`` where ``i`` and
    ``j`` are the positions of the two distributions in the scenario, so a
    cell's numbers do not depend on which other cells are run. Errors are
    caught and recorded on the returned cell.
    """
    sources = resolve_sources(spec) if sources is None else sources
    x_label, y_label = spec.pairs[index]
    labels = spec.labels
    key = (spec.seed, labels.index(x_label), labels.index(y_label))
    cell = CellResult(x_label, y_label, index, key)
    start = time.perf_counter()
    try:
        gen = CellGenerator(sources[x_label], sources[y_label], spec.n, spec.m,
                            spec.missingness_x, spec.missingness_y)
        res = warp_speed_study(gen, spec.procedures, spec.N, alpha=spec.alpha,
                               seed=key, jobs=jobs)
        cell.rates = res.as_dict()
        cell.missing_x = _average_missing(res.missing_rates_x, spec.missingness_x)
        cell.missing_y = _average_missing(res.missing_rates_y, spec.missingness_y)
    except EnergyMissingError as exc:
        cell.status = "failed"
        cell.error = f"{type(exc).__name__}: {exc}"
    cell.runtime = time.perf_counter() - start
    return cell


def _ordered_unique(items):
    return list(dict.fromkeys(items))


def run_scenario(spec: ScenarioSpec, jobs=None, progress=None) -> PowerTable:
    """Run every cell; failures are recorded, never raised."""
    sources = resolve_sources(spec)
    cells = []
    for i in range(len(spec.pairs)):
        cells.append(run_cell(spec, i, jobs=jobs, sources=sources))
        if progress is not None:
            progress(cells[-1])
    return PowerTable(
        name=spec.name,
        x_labels=_ordered_unique(p[0] for p in spec.pairs),
        y_labels=_ordered_unique(p[1] for p in spec.pairs),
        cells=cells,
        logistic=spec.logistic,
    )


def run_wine_study(white, red, missingness: MissingnessSpec, N=2000, seed=0,
                   n=100, m=50, alpha=0.05, procedures=None, pairs="all",
                   jobs=None, name="wine") -> PowerTable:
    """Power table for two finite populations (sampled with replacement).

    ``white`` and ``red`` are :class:`PopulationSource` or loaded
    :class:`Population` objects; ``pairs`` is "all" (the 2 x 2 grid) or a
    list of (x_label, y_label) with labels "white" and "red".
    """
    pops = {}
    for label, src in (("white", white), ("red", red)):
        pops[label] = load_population(src) if isinstance(src, PopulationSource) else src
    if pairs == "all":
        pairs = [(a, b) for a in pops for b in pops]
    procedures = tuple(study_procedures(alpha=alpha) if procedures is None else procedures)
    spec = ScenarioSpec(
        name=name, sources=pops, pairs=tuple(tuple(p) for p in pairs), n=n, m=m,
        missingness_x=missingness, missingness_y=missingness, procedures=procedures,
        N=N, alpha=alpha, seed=seed,
    )
    return run_scenario(spec, jobs=jobs)


def manifest(spec: ScenarioSpec, table: PowerTable, outputs=()):
    """Run record: seed, config hash, per-cell runtime and status."""
    from .. import __version__

    return {
        "scenario": spec.name,
        "version": __version__,
        "seed": spec.seed,
        "config_sha256": spec.config_hash(),
        "replicates": spec.N,
        "alpha": spec.alpha,
        "n": spec.n,
        "m": spec.m,
        "outputs": list(outputs),
        "cells": [
            {
                "x": c.x,
                "y": c.y,
                "seed": list(c.seed),
                "status": c.status,
                "error": c.error,
                "runtime_seconds": round(c.runtime, 3),
            }
            for c in table.cells
        ],
        "failed_cells": [
            {"x": c.x, "y": c.y, "seed": list(c.seed), "error": c.error} for c in table.failed
        ],
    }


def write_manifest(path, record):
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2)
        fh.write("\n")


def source_dimension(source):
    if isinstance(source, (Dgp, Population)):
        return source.d
    return len(source.columns)
