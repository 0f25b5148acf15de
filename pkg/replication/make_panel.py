"""Regenerate panel_synthetic.csv, the demonstration panel used by `debtstress estimate`.

The panel is simulated from known coefficients (debtstress.econometrics.DEFAULT_TRUTH),
so estimates can be checked against the values that generated it.
"""
from pathlib import Path

from debtstress.econometrics import synthetic_panel
from debtstress.ingest import write_table

UNITS = {"country": "text", "year": "year", "gdp_growth": "percent", "lcompshock": "index",
         "onset": "binary", "damage": "percent_gdp", "ae": "binary", "nd_capacity": "index",
         "fb": "percent_gdp", "extrand1995": "binary"}

if __name__ == "__main__":
    panel = synthetic_panel(n_countries=150, n_years=30, noise=0.1, seed=1)
    write_table(Path(__file__).with_name("panel_synthetic.csv"), panel, UNITS,
                {"content": "synthetic country-year panel drawn from DEFAULT_TRUTH", "seed": 1})
