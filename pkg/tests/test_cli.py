"""Tests for ingestion, run configuration and the command line"""

import json
from pathlib import Path

import numpy as np
import pytest
import yaml
from loguru import logger

from newellcast.cli import RunConfig, component_seed, ingest, load_config, write_detector_csv
from newellcast.core import small_section
from newellcast.errors import ConfigError, IngestError
from newellcast.main import main

from .helpers import T0, series

HEADER = "timestamp,station_id,flow_veh_per_5min,occupancy,speed_mph\n"


def stamp(i):
    return f"2021-07-01T{(i * 5) // 60:02d}:{(i * 5) % 60:02d}:00Z"


def write_rows(path, rows):
    path.write_text(HEADER + "".join(f"{r}\n" for r in rows), encoding="utf-8")
    return path


class CapturedWarnings:
    """Collect loguru warnings emitted inside a with-block"""

    def __enter__(self):
        self.messages = []
        self.sink = logger.add(lambda m: self.messages.append(m.record["message"]), level="WARNING")
        return self.messages

    def __exit__(self, *exc):
        logger.remove(self.sink)


class TestIngest:
    """Test cases for reading detector CSV files"""

    def test_well_formed(self, tmp_path):
        """Test two stations become two series with geometry positions"""
        rows = [f"{stamp(i)},{sid},{10 + i},0.05,62.5" for i in range(3) for sid in ("S1", "S2")]
        result = ingest(write_rows(tmp_path / "d.csv", rows), small_section())
        assert [s.station_id for s in result] == ["S1", "S2"]
        assert result[1].position == pytest.approx(1.0)
        np.testing.assert_array_equal(result[0].flow, [10, 11, 12])
        assert result[0].t0 == pytest.approx(T0)

    def test_out_of_order(self, tmp_path):
        """Test shuffled rows are re-sorted with a warning"""
        rows = [f"{stamp(i)},S1,{i},0.05,60" for i in (2, 0, 1)]
        with CapturedWarnings() as messages:
            result = ingest(write_rows(tmp_path / "d.csv", rows))
        np.testing.assert_array_equal(result[0].flow, [0, 1, 2])
        assert any("re-sorted" in m for m in messages)

    def test_short_gap_filled(self, tmp_path):
        """Test two missing intervals are interpolated"""
        rows = [f"{stamp(i)},S1,{10 * i},0.05,60" for i in (0, 3, 4)]
        with CapturedWarnings() as messages:
            result = ingest(write_rows(tmp_path / "d.csv", rows))
        np.testing.assert_allclose(result[0].flow, [0, 10, 20, 30, 40])
        assert any("missing" in m for m in messages)

    def test_long_gap_rejected(self, tmp_path):
        """Test three missing intervals exceed the default limit"""
        rows = [f"{stamp(i)},S1,1,0.05,60" for i in (0, 4)]
        with pytest.raises(IngestError) as info:
            ingest(write_rows(tmp_path / "d.csv", rows))
        assert info.value.line == 3

    def test_reject_policy(self, tmp_path):
        """Test the reject policy refuses any gap"""
        rows = [f"{stamp(i)},S1,1,0.05,60" for i in (0, 2)]
        with pytest.raises(IngestError):
            ingest(write_rows(tmp_path / "d.csv", rows), gap_policy="reject")

    def test_malformed_line(self, tmp_path):
        """Test a non-numeric flow reports its file line"""
        rows = [f"{stamp(0)},S1,1,0.05,60", f"{stamp(1)},S1,1,0.05,60", f"{stamp(2)},S1,abc,0.05,60"]
        with pytest.raises(IngestError) as info:
            ingest(write_rows(tmp_path / "d.csv", rows))
        assert info.value.line == 4

    def test_occupancy_range(self, tmp_path):
        """Test occupancy above 1 is malformed"""
        with pytest.raises(IngestError) as info:
            ingest(write_rows(tmp_path / "d.csv", [f"{stamp(0)},S1,1,1.5,60"]))
        assert info.value.line == 2

    def test_bad_header(self, tmp_path):
        """Test the header is checked"""
        path = tmp_path / "d.csv"
        path.write_text("time,station,flow\n", encoding="utf-8")
        with pytest.raises(IngestError) as info:
            ingest(path)
        assert info.value.line == 1

    def test_duplicate_timestamp(self, tmp_path):
        """Test repeated intervals for a station are refused"""
        rows = [f"{stamp(0)},S1,1,0.05,60", f"{stamp(0)},S1,2,0.05,60"]
        with pytest.raises(IngestError):
            ingest(write_rows(tmp_path / "d.csv", rows))

    def test_written_file_reads_back(self, tmp_path):
        """Test written detector files ingest without warnings"""
        rng = np.random.default_rng(0)
        original = [series(rng.uniform(0, 150, 20), station_id=sid, speed=rng.uniform(10, 70, 20),
                           occupancy=rng.uniform(0, 1, 20)) for sid in ("S1", "S2")]
        path = write_detector_csv(original, tmp_path / "out" / "d.csv")
        assert path.read_bytes().count(b"\r") == 0
        with CapturedWarnings() as messages:
            result = ingest(path)
        assert messages == []
        for before, after in zip(original, result):
            np.testing.assert_allclose(before.flow, after.flow, rtol=1e-12)
            np.testing.assert_allclose(before.speed, after.speed, rtol=1e-12)
            assert after.t0 == before.t0


class TestRunConfig:
    """Test cases for configuration validation"""

    def test_defaults(self):
        """Test an empty document gives the documented defaults"""
        config = RunConfig.from_dict({})
        assert config.lag == 10 and config.train.batch_size == 10
        assert config.scenarios[0] == "A1"
        assert len(config.variants) == 4
        assert config.fd.diagram().qc == pytest.approx(65.0 * 150.0 * 14.0 / 79.0)

    def test_architecture_presets(self):
        """Test the second architecture's lag and batch presets"""
        config = RunConfig.from_dict({"architecture": "dataset2"})
        assert (config.lag, config.train.batch_size) == (20, 20)

    @pytest.mark.parametrize("data, path", [
        ({"train": {"epochs": -1}}, "train.epochs"),
        ({"fd": {"vf": "fast"}}, "fd.vf"),
        ({"variants": ["regular", "magic"]}, "variants[1]"),
        ({"scenarios": ["Z9"]}, "scenarios[0]"),
        ({"train": {"split": [0.5, 0.5, 0.5]}}, "train.split"),
        ({"geometry": {"stations": [{"id": "a", "position": 0.0}, {"id": "b", "position": 1.0}]}},
         "geometry.stations"),
        ({"bogus": 1}, "bogus"),
        ({"ingest": {"gap_policy": "guess"}}, "ingest.gap_policy"),
    ])
    def test_dotted_errors(self, data, path):
        """Test errors name the offending field"""
        with pytest.raises(ConfigError) as info:
            RunConfig.from_dict(data)
        assert info.value.path == path

    @pytest.mark.parametrize("data, path", [
        ({"train": {"epoch": 5}}, "train.epoch"),
        ({"fd": {"vf": 60.0, "speed": 60.0}}, "fd.speed"),
        ({"simulation": {"preset": "shock", "day": 2}}, "simulation.day"),
        ({"ingest": {"max_gaps": 3}}, "ingest.max_gaps"),
        ({"geometry": {"preset": "large", "offset": 1.0}}, "geometry.offset"),
        ({"inputs": {"detector": "d.csv"}}, "inputs.detector"),
        ({"geometry": {"stations": [{"id": "S1", "position": 0.0, "pos": 1.0}]}}, "geometry.stations[0].pos"),
    ])
    def test_unknown_nested_key(self, data, path):
        """Test a misspelt key inside a section is refused with its dotted path"""
        with pytest.raises(ConfigError) as info:
            RunConfig.from_dict(data)
        assert info.value.path == path
        assert "unknown key" in info.value.message

    def test_explicit_stations(self):
        """Test four explicit stations replace the preset"""
        stations = [{"id": f"D{i}", "position": float(i)} for i in range(4)]
        config = RunConfig.from_dict({"geometry": {"stations": stations}})
        assert config.geometry.station_ids == ["D0", "D1", "D2", "D3"]

    def test_overrides(self):
        """Test command-line values replace file values"""
        config = RunConfig.from_dict({"seed": 3, "jobs": 2}).with_overrides(out="elsewhere", seed=9)
        assert config.seed == 9 and config.train.seed == 9
        assert config.jobs == 2
        assert config.out == Path("elsewhere")

    def test_component_seed(self):
        """Test job seeds depend on the run seed and job name only"""
        assert component_seed(0, "train/A1_regular") == component_seed(0, "train/A1_regular")
        assert component_seed(0, "train/A1_regular") != component_seed(0, "train/A1_hybrid")
        assert component_seed(0, "train/A1_regular") != component_seed(1, "train/A1_regular")

    def test_load_yaml(self, tmp_path):
        """Test reading a YAML document"""
        path = tmp_path / "run.yaml"
        path.write_text(yaml.safe_dump({"fd": {"vf": 60.0}, "horizons": [1, 2]}), encoding="utf-8")
        config = load_config(path)
        assert config.fd.vf == 60.0
        assert config.horizons == (1, 2)

    def test_missing_file(self, tmp_path):
        """Test a missing configuration file"""
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.yaml")


def write_config(tmp_path, **data):
    path = tmp_path / "run.yaml"
    data.setdefault("out", str(tmp_path / "run"))
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return str(path)


class TestMain:
    """Test cases for the command-line entry point"""

    def test_config_error_exit_code(self, tmp_path, capsys):
        """Test a configuration error exits 2 with a JSON error on stdout"""
        code = main(["train", "-c", write_config(tmp_path, train={"epochs": -1}), "--log-level", "ERROR"])
        assert code == 2
        error = json.loads(capsys.readouterr().out)
        assert error["error"] == "ConfigError"
        assert error["context"]["path"] == "train.epochs"

    def test_missing_detectors(self, tmp_path, capsys):
        """Test commands needing data fail cleanly before simulate has run"""
        code = main(["estimate", "-c", write_config(tmp_path), "--log-level", "ERROR"])
        assert code == 2
        assert json.loads(capsys.readouterr().out)["context"]["path"] == "inputs.detectors"

    def test_estimate_constant_speed(self, tmp_path, capsys):
        """Test constant speeds estimate that speed as vf"""
        geometry = small_section()
        data = [series(np.full(120, 100.0), station_id=sid, position=pos, speed=np.full(120, 55.0))
                for sid, pos in geometry.stations]
        detectors = write_detector_csv(data, tmp_path / "detectors.csv")
        config = write_config(tmp_path, inputs={"detectors": str(detectors)})
        assert main(["estimate", "-c", config, "--log-level", "ERROR"]) == 0
        assert "Successfully ran estimate" in capsys.readouterr().out
        params = json.loads((tmp_path / "run" / "section_params.json").read_text())
        assert params["fd"]["vf"] == pytest.approx(55.0)
        assert params["fd"]["qc"] == pytest.approx(1200.0)
        assert (tmp_path / "run" / "congestion_share.csv").exists()

    def test_preset_uses_configured_stations(self, tmp_path):
        """Test a validation preset reports at the configured stations and feeds later commands"""
        config = write_config(tmp_path, simulation={"preset": "free_flow"}, scenarios=["A1"],
                              variants=["regular"])
        assert main(["simulate", "-c", config, "--log-level", "ERROR"]) == 0
        result = ingest(tmp_path / "run" / "detectors.csv")
        geometry = small_section()
        assert [s.station_id for s in result] == geometry.station_ids
        assert len(result[0]) == 36
        assert main(["transform", "-c", config, "--log-level", "ERROR"]) == 0
        assert (tmp_path / "run" / "features" / "A1_regular_target.csv").exists()


@pytest.fixture(scope="class")
def one_day(tmp_path_factory):
    """A one-day simulated case study written by the simulate command"""
    root = tmp_path_factory.mktemp("pipeline")
    config = write_config(root, simulation={"days": 1}, scenarios=["A1", "B1"], variants=["regular", "hybrid"],
                          train={"epochs": 1})
    assert main(["simulate", "-c", config, "--log-level", "WARNING"]) == 0
    return root, config


class TestPipeline:
    """Test cases running the subcommands in sequence"""

    def test_simulate_output(self, one_day):
        """Test the simulated file covers four stations for a day"""
        root, _ = one_day
        result = ingest(root / "run" / "detectors.csv")
        assert [s.station_id for s in result] == ["S1", "S2", "S3", "S4"]
        assert len(result[0]) == 288

    def test_train_evaluate_report(self, one_day):
        """Test models, metrics and tables are written and refused variants are marked"""
        root, config = one_day
        run = root / "run"
        assert main(["transform", "-c", config, "--log-level", "WARNING"]) == 0
        assert (run / "features" / "A1_hybrid_transfer.csv").exists()
        assert not (run / "features" / "B1_hybrid_target.csv").exists()

        assert main(["train", "-c", config, "--log-level", "WARNING"]) == 0
        assert (run / "models" / "A1_hybrid_h1.nwl").exists()
        assert (run / "models" / "A1_regular_h1_loss.csv").exists()
        assert not (run / "models" / "B1_hybrid_h1.nwl").exists()

        assert main(["evaluate", "-c", config, "--log-level", "WARNING"]) == 0
        rows = json.loads((run / "metrics.json").read_text())
        assert len(rows) == 2 * 2 * 2 * 3
        refused = [r for r in rows if r["scenario"] == "B1" and r["variant"] == "Hybrid"]
        assert len(refused) == 6 and not any(r["supported"] for r in refused)
        assert (run / "traces" / "A1_regular_h1_transfer.csv").exists()

        assert main(["report", "-c", config, "--log-level", "WARNING"]) == 0
        table = (run / "report_rmse.txt").read_text()
        assert "A1" in table and "-" in table

    def test_parallel_matches_serial(self, one_day, tmp_path):
        """Test worker processes produce the same models as a serial run"""
        root, _ = one_day
        outputs = []
        for jobs in (1, 2):
            out = tmp_path / f"jobs{jobs}"
            config = write_config(tmp_path, inputs={"detectors": str(root / "run" / "detectors.csv")},
                                  scenarios=["A1"], variants=["regular", "hybrid"], train={"epochs": 1},
                                  out=str(out))
            assert main(["train", "-c", config, "--jobs", str(jobs), "--log-level", "WARNING"]) == 0
            outputs.append(out)
        for name in ("A1_regular_h1.nwl", "A1_hybrid_h1.nwl"):
            assert (outputs[0] / "models" / name).read_bytes() == (outputs[1] / "models" / name).read_bytes()
