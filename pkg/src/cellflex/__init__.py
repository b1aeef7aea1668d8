"""cellflex: digital twin of a multi-modal low-voltage energy cell.

The package couples plant models (battery storage, PV inverters, heat-pump
systems, electric vehicles, household loads) on a radial feeder with a basin
hopping dispatcher that splits an active/reactive flexibility request at the
point of common coupling across all controllable plants at minimum cost.
"""

__version__ = "0.1.0"
