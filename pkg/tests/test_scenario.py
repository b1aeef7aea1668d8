"""Scenario schema: loading, validation, profiles, round-trip serialization."""

import json
import math

import pytest

from cellflex.errors import ConfigurationError
from cellflex.scenario import (
    HouseholdParams,
    LinearSeries,
    StepSeries,
    build_profiles,
    load_bundled_scenario,
    load_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)


def minimal_dict(**overrides):
    """Two-bus scenario with one plain household; deep-merged overrides."""
    data = {
        "name": "mini",
        "topology": {
            "pcc_bus": "pcc",
            "transformer_kva": 100.0,
            "buses": [{"id": "pcc"}, {"id": "h01"}],
            "lines": [{"from": "pcc", "to": "h01",
                       "r_ohm": 0.01, "x_ohm": 0.004, "i_max_a": 200.0}],
        },
        "weather": {"ambient_mean_c": 5.0, "ambient_swing_c": 3.0},
        "simulation": {"start": "2023-01-16T20:00:00", "internal_dt_s": 1.0,
                       "warmup_s": 3600.0},
        "prosumers": [
            {"id": "p01", "bus": "h01",
             "household": {"p_base_kw": 0.5, "p_morning_kw": 0.4,
                           "p_evening_kw": 1.0}},
        ],
    }
    for key, value in overrides.items():
        if isinstance(value, dict):
            data[key].update(value)
        else:
            data[key] = value
    return data


class TestSeries:
    def test_step_series_is_piecewise_constant(self):
        s = StepSeries(0.0, 10.0, (1.0, 2.0, 3.0))
        assert s.value(0.0) == 1.0
        assert s.value(9.999) == 1.0
        assert s.value(10.0) == 2.0
        assert s.value(29.999) == 3.0

    def test_linear_series_interpolates(self):
        s = LinearSeries(0.0, 10.0, (0.0, 10.0, 0.0))
        assert s.value(5.0) == pytest.approx(5.0)
        assert s.value(10.0) == pytest.approx(10.0)
        assert s.value(15.0) == pytest.approx(5.0)

    @pytest.mark.parametrize("t", [-0.001, 30.0, 1e9])
    def test_step_series_out_of_coverage(self, t):
        s = StepSeries(0.0, 10.0, (1.0, 2.0, 3.0))
        with pytest.raises(ConfigurationError, match="does not cover"):
            s.value(t)

    @pytest.mark.parametrize("t", [-0.001, 20.0, 25.0])
    def test_linear_series_out_of_coverage(self, t):
        s = LinearSeries(0.0, 10.0, (0.0, 10.0, 0.0))
        with pytest.raises(ConfigurationError, match="does not cover"):
            s.value(t)


class TestBundledScenario:
    def test_census(self):
        s = load_bundled_scenario()
        assert s.plant_census() == {
            "prosumers": 13, "pv": 10, "bes": 4, "ehp": 6,
            "bev": 18, "bev_v2g": 5, "controllable_plants": 38,
        }

    def test_round_trip_to_dict_and_back(self):
        s = load_bundled_scenario()
        assert scenario_from_dict(scenario_to_dict(s)) == s

    def test_save_load_round_trip(self, tmp_path):
        s = load_bundled_scenario()
        path = tmp_path / "copy.json"
        save_scenario(s, path)
        assert load_scenario(path) == s

    def test_saved_file_ends_with_newline(self, tmp_path):
        s = load_bundled_scenario()
        path = tmp_path / "copy.json"
        save_scenario(s, path)
        assert path.read_text().endswith("\n")

    def test_bundled_json_matches_schema(self):
        jsonschema = pytest.importorskip("jsonschema")
        from importlib import resources
        data_dir = resources.files("cellflex.data")
        schema = json.loads(data_dir.joinpath("scenario.schema.json").read_text())
        document = json.loads(data_dir.joinpath("rural1_flex.json").read_text())
        jsonschema.validate(document, schema)

    def test_buses_carry_prosumer_attachment(self):
        s = load_bundled_scenario()
        by_id = {b.id: b for b in s.buses}
        assert by_id["h01"].prosumer == "p01"
        assert by_id["pcc"].prosumer is None
        assert by_id["j1"].prosumer is None

    def test_start_time_of_day(self):
        s = load_bundled_scenario()
        assert s.start_tod_s() == 20 * 3600.0

    def test_unknown_bundled_name(self):
        with pytest.raises(FileNotFoundError):
            load_bundled_scenario("no_such_cell")


class TestLoaderValidation:
    def test_minimal_loads(self):
        s = scenario_from_dict(minimal_dict())
        assert s.name == "mini"
        assert len(s.prosumers) == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="cannot read"):
            load_scenario(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigurationError, match="invalid JSON"):
            load_scenario(path)

    def test_duplicate_prosumer_id(self):
        d = minimal_dict()
        d["topology"]["buses"].append({"id": "h02"})
        d["topology"]["lines"].append(
            {"from": "pcc", "to": "h02", "r_ohm": 0.01, "x_ohm": 0.004,
             "i_max_a": 200.0})
        d["prosumers"].append(dict(d["prosumers"][0], bus="h02"))
        with pytest.raises(ConfigurationError, match=r"prosumers\[1\].id: duplicate"):
            scenario_from_dict(d)

    def test_two_prosumers_on_one_bus(self):
        d = minimal_dict()
        d["prosumers"].append(dict(d["prosumers"][0], id="p02"))
        with pytest.raises(ConfigurationError, match="already has a prosumer"):
            scenario_from_dict(d)

    def test_unknown_bus(self):
        d = minimal_dict()
        d["prosumers"][0]["bus"] = "h99"
        with pytest.raises(ConfigurationError, match="unknown bus 'h99'"):
            scenario_from_dict(d)

    def test_prosumer_on_pcc(self):
        d = minimal_dict()
        d["prosumers"][0]["bus"] = "pcc"
        with pytest.raises(ConfigurationError, match="PCC"):
            scenario_from_dict(d)

    def test_bad_device_parameter_names_json_path(self):
        d = minimal_dict()
        d["prosumers"][0]["bes"] = {"capacity_kwh": -5.0,
                                    "p_max_charge_kw": 2.0,
                                    "p_max_discharge_kw": 2.0}
        with pytest.raises(ConfigurationError, match=r"prosumers\[0\].bes"):
            scenario_from_dict(d)

    def test_missing_required_field_names_json_path(self):
        d = minimal_dict()
        del d["prosumers"][0]["household"]["p_base_kw"]
        with pytest.raises(ConfigurationError,
                           match=r"prosumers\[0\].household.p_base_kw"):
            scenario_from_dict(d)

    def test_non_numeric_field(self):
        d = minimal_dict()
        d["prosumers"][0]["household"]["p_base_kw"] = "half a kilowatt"
        with pytest.raises(ConfigurationError, match="expected a number"):
            scenario_from_dict(d)

    def test_dispatch_step_not_multiple_of_internal_dt(self):
        d = minimal_dict(simulation={"internal_dt_s": 4.0,
                                     "dispatch_step_s": 15.0})
        with pytest.raises(ConfigurationError, match="integer multiple"):
            scenario_from_dict(d)

    def test_warmup_longer_than_profile_window(self):
        d = minimal_dict(simulation={"warmup_s": 86400.0 * 9,
                                     "profile_back_days": 8.0})
        with pytest.raises(ConfigurationError, match="warmup_s"):
            scenario_from_dict(d)

    def test_sunset_before_sunrise(self):
        d = minimal_dict(weather={"ambient_mean_c": 5.0, "ambient_swing_c": 3.0,
                                  "sunrise_hour": 18.0, "sunset_hour": 6.0})
        with pytest.raises(ConfigurationError, match="sunset_hour"):
            scenario_from_dict(d)

    def test_non_iso_start(self):
        d = minimal_dict(simulation={"start": "yesterday evening"})
        with pytest.raises(ConfigurationError, match="ISO timestamp"):
            scenario_from_dict(d)

    def test_dangling_line_rejected(self):
        d = minimal_dict()
        d["topology"]["lines"][0]["to"] = "h77"
        with pytest.raises(ConfigurationError):
            scenario_from_dict(d)

    def test_bad_ehp_thermostat_band(self):
        d = minimal_dict()
        d["prosumers"][0]["ehp"] = {"p_el_max_kw": 3.0, "p_element_kw": 5.0,
                                    "storage_kwh_per_k": 0.4,
                                    "t_on_c": 48.0, "t_off_c": 42.0}
        with pytest.raises(ConfigurationError, match=r"prosumers\[0\].ehp"):
            scenario_from_dict(d)


class TestProfiles:
    def test_household_peaks_morning_and_evening(self):
        hh = HouseholdParams(p_base_kw=0.3, p_morning_kw=0.6, p_evening_kw=1.2)
        d = minimal_dict()
        d["prosumers"][0]["household"] = {
            "p_base_kw": 0.3, "p_morning_kw": 0.6, "p_evening_kw": 1.2}
        s = scenario_from_dict(d)
        profiles = build_profiles(s)
        p, q, _ = profiles.household["p01"]
        # t = 0 is 20:00; evening shoulder well above the small hours
        assert p.value(0.0) > p.value(7 * 3600.0)  # 20:00 vs 03:00
        assert q.value(0.0) == pytest.approx(p.value(0.0) * 0.20)
        peak_evening = hh.p_base_kw + hh.p_evening_kw \
            + hh.p_morning_kw * math.exp(-(12.0 / 1.3) ** 2)
        # the sampled grid straddles 19:30; allow the 15-min discretization
        assert max(p.values) == pytest.approx(peak_evening, rel=0.05)

    def test_irradiance_zero_at_night_positive_at_noon(self):
        s = scenario_from_dict(minimal_dict())
        profiles = build_profiles(s)
        assert profiles.irradiance.value(0.0) == 0.0          # 20:00
        assert profiles.irradiance.value(-8 * 3600.0) > 100.0  # noon

    def test_ambient_peaks_at_configured_hour(self):
        s = scenario_from_dict(minimal_dict())
        profiles = build_profiles(s)
        at_peak = profiles.ambient.value(-6 * 3600.0)   # 14:00
        at_trough = profiles.ambient.value(6 * 3600.0)  # 02:00
        assert at_peak == pytest.approx(5.0 + 3.0, abs=0.01)
        assert at_peak > at_trough

    def test_heat_demand_tracks_cold(self):
        d = minimal_dict()
        d["prosumers"][0]["household"].update(
            {"heat_ua_kw_per_k": 0.1, "heat_base_kw": 0.2})
        d["weather"] = {"ambient_mean_c": -1.0, "ambient_swing_c": 0.0}
        s = scenario_from_dict(d)
        profiles = build_profiles(s)
        _, _, heat = profiles.household["p01"]
        assert heat.value(0.0) == pytest.approx(0.2 + 0.1 * 18.0)

    def test_coverage_matches_configured_window(self):
        s = scenario_from_dict(minimal_dict())
        profiles = build_profiles(s)
        profiles.ambient.value(-8 * 86400.0)
        profiles.ambient.value(2 * 86400.0 - 1800.0)
        with pytest.raises(ConfigurationError, match="does not cover"):
            profiles.ambient.value(-8 * 86400.0 - 1.0)
