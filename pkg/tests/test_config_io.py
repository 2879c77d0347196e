import numpy as np
import pytest

from railsched.config import ConfigError, default_config, load_config, with_updates
from railsched.engine import replay_check, run
from railsched.traceio import read_summary, read_trace, trace_columns, write_summary, write_trace


class TestDefaults:
    def test_builtin_defaults(self):
        cfg = default_config()
        assert cfg.traffic.avg_power == 36.0
        assert cfg.radio.bandwidth == 5e6
        assert cfg.radio.packet_bits == 240.0
        assert cfg.geometry.slot_duration == 1e-3
        assert cfg.radio.pathloss_exp == 4.0
        assert cfg.radio.noise_psd == pytest.approx(10 ** (-17.4) * 1e-3, rel=1e-12)
        assert cfg.geometry.speed == pytest.approx(100.0)  # 360 km/h
        assert cfg.geometry.cell_radius == 1500.0
        assert cfg.geometry.rail_offset == 50.0
        assert cfg.num_services == 6

    def test_eta_computed(self):
        assert default_config().eta == pytest.approx(0.048, rel=1e-15)

    def test_empty_file_equals_defaults(self, tmp_path):
        path = tmp_path / "empty.ini"
        path.write_text("")
        assert load_config(path) == default_config()

    def test_missing_file_raises(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.ini")


class TestLoading:
    def test_single_override(self, tmp_path):
        path = tmp_path / "omega.ini"
        path.write_text("[control]\nomega = 0.4\n")
        cfg = load_config(path)
        assert cfg.omega == 0.4
        assert with_updates(cfg, omega=0.8) == default_config()

    def test_keyword_overrides(self):
        cfg = load_config(None, seed=9, **{"control.omega": 0.2})
        assert cfg.seed == 9 and cfg.omega == 0.2

    def test_rate_vector(self, tmp_path):
        path = tmp_path / "rates.ini"
        path.write_text("[traffic]\nnum_services = 3\narrival_rate_pkts = 5, 10, 15\ndelay_bound_slots = 15\n")
        cfg = load_config(path)
        assert cfg.traffic.arrival_rates == (5.0, 10.0, 15.0)
        assert cfg.traffic.delay_bounds == (15.0, 15.0, 15.0)

    def test_rate_vector_wrong_length(self, tmp_path):
        path = tmp_path / "rates.ini"
        path.write_text("[traffic]\nnum_services = 3\narrival_rate_pkts = 5, 10\n")
        with pytest.raises(ConfigError, match="arrival_rate_pkts"):
            load_config(path)

    def test_eta_consistency_accepted(self, tmp_path):
        path = tmp_path / "eta.ini"
        path.write_text("[radio]\neta = 0.048\n")
        assert load_config(path).eta == pytest.approx(0.048)

    def test_eta_mismatch_rejected(self, tmp_path):
        path = tmp_path / "eta.ini"
        path.write_text("[radio]\neta = 0.05\n")
        with pytest.raises(ConfigError, match="eta"):
            load_config(path)

    def test_avg_power_above_cap_rejected(self, tmp_path):
        path = tmp_path / "power.ini"
        path.write_text("[radio]\nmax_power_w = 30\n")
        with pytest.raises(ConfigError, match="avg_power_w"):
            load_config(path)

    def test_pathloss_exponent_floor(self, tmp_path):
        path = tmp_path / "alpha.ini"
        path.write_text("[radio]\npathloss_exp = 1.5\n")
        with pytest.raises(ConfigError, match="pathloss_exp"):
            load_config(path)

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "weird.ini"
        path.write_text("[radio]\nbandwidht_hz = 5e6\n")
        with pytest.raises(ConfigError, match="bandwidht"):
            load_config(path)

    def test_bad_policy_rejected(self, tmp_path):
        path = tmp_path / "pol.ini"
        path.write_text("[run]\npolicy = psychic\n")
        with pytest.raises(ConfigError, match="policy"):
            load_config(path)


@pytest.fixture(scope="module")
def short_run():
    config = with_updates(default_config(), horizon=300, seed=21)
    trace, summary = run(config)
    return config, trace, summary


class TestTraceRoundTrip:
    def test_write_read_write_bytes_identical(self, tmp_path, short_run):
        _, trace, _ = short_run
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        write_trace(trace, first)
        write_trace(read_trace(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_column_schema(self, short_run):
        _, trace, _ = short_run
        cols = trace_columns(trace.num_services)
        assert len(cols) == 6 + 4 * trace.num_services + 2
        assert len(set(cols)) == len(cols)
        assert cols[:6] == ["t", "d", "N", "P", "C", "served"]
        assert cols[-2:] == ["Y", "drops"]

    def test_header_row_matches_schema(self, tmp_path, short_run):
        _, trace, _ = short_run
        path = tmp_path / "t.csv"
        write_trace(trace, path)
        header = path.read_text().splitlines()[0].split(",")
        assert header == trace_columns(trace.num_services)

    def test_values_parse_back_exactly(self, tmp_path, short_run):
        _, trace, _ = short_run
        path = tmp_path / "t.csv"
        write_trace(trace, path)
        loaded = read_trace(path)
        assert np.array_equal(loaded.virtual_delay, trace.virtual_delay)
        assert np.array_equal(loaded.power, trace.power)
        assert np.array_equal(loaded.distance, trace.distance)
        assert np.array_equal(loaded.noise, trace.noise)
        assert np.array_equal(loaded.arrivals, trace.arrivals)

    def test_loaded_trace_replays(self, tmp_path, short_run):
        config, trace, _ = short_run
        path = tmp_path / "t.csv"
        write_trace(trace, path)
        replay_check(read_trace(path), config)

    def test_mangled_header_rejected(self, tmp_path, short_run):
        _, trace, _ = short_run
        path = tmp_path / "t.csv"
        write_trace(trace, path)
        body = path.read_text().splitlines()
        body[0] = body[0].replace("served", "sreved")
        path.write_text("\n".join(body) + "\n")
        with pytest.raises(ValueError):
            read_trace(path)


class TestSummaryRoundTrip:
    def test_write_read_write_bytes_identical(self, tmp_path, short_run):
        _, _, summary = short_run
        first = tmp_path / "a.txt"
        second = tmp_path / "b.txt"
        write_summary(summary, first)
        write_summary(read_summary(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_fields_survive(self, tmp_path, short_run):
        _, _, summary = short_run
        path = tmp_path / "s.txt"
        write_summary(summary, path)
        loaded = read_summary(path)
        assert loaded == summary

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "s.txt"
        path.write_text("avg_power = 1.0\n")
        with pytest.raises(ValueError):
            read_summary(path)
