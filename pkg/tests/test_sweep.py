"""Тесты перебора параметров."""

import csv

import pytest

from swarm_scheduler.cli.interface import EXIT_OK, EXIT_PARTIAL, execute
from swarm_scheduler.core.exceptions import ConfigurationError
from swarm_scheduler.core.utils import derive_seed
from swarm_scheduler.experiments.config import load_config
from swarm_scheduler.experiments.sweep import (
    SweepSpec,
    expand_values,
    load_sweep_spec,
    run_sweep,
    sweep_columns,
)

SWEEP_DOC = """\
[sweep]
policies = ["GRDY", "PCP"]
replicates = 2

[sweep.grid]
"nodes.capacitance_f" = [0.01, 0.02]
"""


def _rows(path):
    with open(path, encoding="utf-8", newline="") as handle:
        return list(csv.reader(handle))


class TestExpandValues:
    def test_list_and_scalar(self):
        assert expand_values("a.b", [1, 2]) == [1, 2]
        assert expand_values("a.b", 5) == [5]

    def test_generated_axes(self):
        logspace = expand_values("a.b", {"logspace": [1.0, 100.0, 3]})
        assert logspace == pytest.approx([1.0, 10.0, 100.0])
        linspace = expand_values("a.b", {"linspace": [0.0, 1.0, 3]})
        assert linspace == pytest.approx([0.0, 0.5, 1.0])
        assert expand_values("a.b", {"range": [10, 30, 10]}) == [10, 20]

    @pytest.mark.parametrize(
        "values",
        [
            [],
            {"geomspace": [1, 2, 3]},
            {"range": [1, 2]},
            {"linspace": [0, 1, 2], "range": [0, 1, 1]},
        ],
    )
    def test_rejected_axes(self, values):
        with pytest.raises(ConfigurationError) as excinfo:
            expand_values("nodes.count", values)
        assert excinfo.value.key == "sweep.grid.nodes.count"


class TestSweepSpec:
    def test_from_mapping(self):
        body = {"policies": "PCP", "replicates": 3, "grid": {"sim.seed": [1, 2]}}
        spec = SweepSpec.from_mapping({"sweep": body})
        assert spec.policies == ["PCP"]
        assert spec.size == 6

    def test_scenarios_are_numbered_in_order(self):
        spec = SweepSpec(policies=["PCP"], replicates=2, grid={"nodes.count": [6, 8]})
        points = list(spec.scenarios(master_seed=5))
        assert [(p.index, p.replicate, p.params["nodes.count"]) for p in points] == [
            (0, 0, 6),
            (1, 1, 6),
            (2, 0, 8),
            (3, 1, 8),
        ]
        assert [p.seed for p in points] == [derive_seed(5, i) for i in range(4)]
        assert len({p.seed for p in points}) == 4

    @pytest.mark.parametrize(
        "body",
        [
            {"policies": []},
            {"replicates": 0},
            {"replicates": True},
            {"grid": {"capacitance": [1.0]}},
            {"repeats": 2},
        ],
    )
    def test_invalid(self, body):
        with pytest.raises(ConfigurationError):
            SweepSpec.from_mapping({"sweep": body})

    def test_missing_table(self):
        with pytest.raises(ConfigurationError):
            SweepSpec.from_mapping({"grid": {}})

    def test_columns(self):
        spec = SweepSpec(grid={"nodes.capacitance_f": [0.01]})
        columns = sweep_columns(spec)
        assert columns[:4] == ["scenario", "replicate", "seed", "nodes.capacitance_f"]
        assert columns[-2:] == ["error_type", "error_message"]


class TestRunSweep:
    def test_rows_cover_scenarios_and_policies(self, write_config, tmp_path):
        config = load_config(write_config())
        spec = load_sweep_spec(write_config(SWEEP_DOC, name="sweep.toml"))
        result = run_sweep(config, spec=spec, out_dir=tmp_path)
        assert (result["rows"], result["failed"]) == (8, 0)
        rows = _rows(tmp_path / "sweep.csv")
        header, body = rows[0], rows[1:]
        capacitance = header.index("nodes.capacitance_f")
        assert [row[capacitance] for row in body] == ["0.01"] * 4 + ["0.02"] * 4
        labels = [row[header.index("policy")] for row in body]
        assert labels == ["GRDY", "PCP_STATIC"] * 4

    @pytest.mark.slow
    def test_parallel_output_is_identical(self, write_config, tmp_path):
        config = load_config(write_config())
        spec = SweepSpec.from_mapping(
            {"sweep": {"policies": ["SRL", "RBS"], "replicates": 3}}
        )
        run_sweep(config, spec=spec, out_dir=tmp_path / "serial", jobs=1)
        run_sweep(config, spec=spec, out_dir=tmp_path / "parallel", jobs=2)
        serial = (tmp_path / "serial" / "sweep.csv").read_bytes()
        assert serial == (tmp_path / "parallel" / "sweep.csv").read_bytes()

    def test_failed_scenarios_are_recorded(self, write_config, tmp_path):
        config = load_config(write_config())
        spec = SweepSpec.from_mapping(
            {"sweep": {"policies": ["GRDY"], "grid": {"sim.horizn": [10]}}}
        )
        result = run_sweep(config, spec=spec, out_dir=tmp_path)
        assert result["failed"] == 1
        row = _rows(tmp_path / "sweep.csv")[1]
        assert row[-2] == "ConfigurationError"
        assert "sim.horizn" in row[-1]


class TestSweepCommand:
    def test_exit_codes(self, write_config, tmp_path):
        scenario = write_config()
        good = write_config(SWEEP_DOC, name="sweep.toml")
        args = ["sweep", "--config", str(scenario), "--sweep"]
        assert execute([*args, str(good), "--out", str(tmp_path / "ok")]) == EXIT_OK
        bad = write_config(
            '[sweep]\npolicies = ["GRDY"]\n\n[sweep.grid]\n"sim.horizon" = [0]\n',
            name="bad.toml",
        )
        code = execute([*args, str(bad), "--out", str(tmp_path / "bad")])
        assert code == EXIT_PARTIAL
