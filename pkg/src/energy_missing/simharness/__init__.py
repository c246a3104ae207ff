"""Declarative simulation scenarios, warp-speed power tables and their output."""
from .runner import (
    CellResult,
    PowerTable,
    manifest,
    run_cell,
    run_scenario,
    run_wine_study,
    write_manifest,
)
from .scenario import (
    CellGenerator,
    Population,
    PopulationSource,
    ScenarioSpec,
    load_population,
    load_scenario,
    parse_missingness,
    parse_scenario,
    shipped_config,
)
from .tables import emit_table, read_csv_table

__all__ = [
    "CellGenerator", "CellResult", "Population", "PopulationSource", "PowerTable",
    "ScenarioSpec", "emit_table", "load_population", "load_scenario", "manifest",
    "parse_missingness", "parse_scenario", "read_csv_table", "run_cell", "run_scenario",
    "run_wine_study", "shipped_config", "write_manifest",
]
