"""Scenario parsing/validation and trace round-trips."""

import json

import pytest

from millibots.errors import ScenarioError, TraceFormatError
from millibots.scenario import (
    BUILTIN_SCENARIOS,
    builtin_scenario,
    load_scenario,
    parse_scenario,
)
from millibots.sim import Engine, SimConfig
from millibots.sim import sequences as seqs
from millibots.trace import dump_trace, parse_trace, read_trace, write_trace


class TestScenario:
    @pytest.mark.parametrize("name", BUILTIN_SCENARIOS)
    def test_builtins_parse_and_build(self, name):
        scenario = parse_scenario(builtin_scenario(name), name=name)
        world = scenario.make_world()
        assert len(world.modules) >= 1
        coils = scenario.make_coils()
        scenario.make_commands(coils)

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text(json.dumps(builtin_scenario("assembly")))
        scenario = load_scenario(path)
        assert scenario.name == "assembly"
        assert scenario.target == "chain(2)"

    def test_units_converted(self):
        scenario = parse_scenario(builtin_scenario("assembly"), name="a")
        world = scenario.make_world()
        assert world.modules[0].pos[0] == pytest.approx(-2.5e-3)
        assert scenario.field_sequence[0]["bx"] == pytest.approx(1.5e-3)

    def test_version_gate(self):
        with pytest.raises(ScenarioError):
            parse_scenario({"scenario_version": 99, "modules": []})

    def test_bad_json_diagnostic(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"scenario_version": 1,,}')
        with pytest.raises(ScenarioError) as err:
            load_scenario(path)
        assert "bad.json:1" in str(err.value)

    def test_overlapping_modules_rejected(self):
        data = {
            "scenario_version": 1,
            "modules": [
                {"id": 0, "type": "free", "x_mm": 0.0, "y_mm": 0.0},
                {"id": 1, "type": "free", "x_mm": 50.0, "y_mm": 0.0},
            ],
        }
        with pytest.raises(ScenarioError):
            parse_scenario(data)  # module outside the workspace

    def test_bad_bond_rejected(self):
        data = {
            "scenario_version": 1,
            "modules": [{"id": 0, "type": "free", "x_mm": 0.0, "y_mm": 0.0}],
            "bonds": [[0, 5]],
        }
        with pytest.raises(ScenarioError):
            parse_scenario(data)

    def test_decreasing_timestamps_rejected(self):
        data = {
            "scenario_version": 1,
            "modules": [{"id": 0, "type": "free", "x_mm": 0.0, "y_mm": 0.0}],
            "field_sequence": [{"t": 1.0, "bx_mT": 1.0}, {"t": 0.5, "bx_mT": 0.0}],
        }
        with pytest.raises(ScenarioError):
            parse_scenario(data)

    def test_moment_presets(self):
        data = builtin_scenario("gripper")
        scenario = parse_scenario(data, name="g")
        world = scenario.make_world()
        m = world.modules[0].moment
        assert m[0] > 0.0 and m[1] == 0.0 and m[2] == 0.0

    def test_calibration_file_reference(self, tmp_path):
        cal = tmp_path / "bench.txt"
        cal.write_text("k_Hx = 2.2e-3 T/A\n")
        data = builtin_scenario("assembly")
        data["calibration_file"] = "bench.txt"
        path = tmp_path / "s.json"
        path.write_text(json.dumps(data))
        scenario = load_scenario(path)
        assert scenario.make_coils().k_hx == 2.2e-3


class TestTrace:
    def make_run(self):
        world = seqs.pair_world(4e-3, moments="rest")
        engine = Engine(world, SimConfig())
        cmds, _, target = seqs.assembly_sequence(engine.coils, 1.5e-3, 5.0)
        return engine.run_sequence(cmds, duration=5.0, target_label=target)

    def test_round_trip(self, tmp_path):
        trajectory, events = self.make_run()
        path = tmp_path / "run.trace"
        write_trace(path, trajectory, events, scenario="assembly", seed=7)
        header, frames = read_trace(path)
        assert header["scenario"] == "assembly"
        assert header["seed"] == 7
        assert len(frames) == len(trajectory)
        for frame, original in zip(frames, trajectory):
            assert frame["t"] == original.time
            for mod, k in zip(frame["modules"], range(original.pos.shape[0])):
                assert mod["x_mm"] == original.pos[k, 0] * 1e3
                assert mod["y_mm"] == original.pos[k, 1] * 1e3
            assert [tuple(b) for b in frame["bonds"]] == list(original.bonds)

    def test_serialization_deterministic(self):
        t1, e1 = self.make_run()
        t2, e2 = self.make_run()
        assert dump_trace(t1, e1, scenario="a", seed=1) == dump_trace(
            t2, e2, scenario="a", seed=1
        )

    def test_events_attached_to_frames(self):
        trajectory, events = self.make_run()
        text = dump_trace(trajectory, events, scenario="a")
        dumped_events = []
        for line in text.splitlines()[1:]:
            dumped_events.extend(json.loads(line)["events"])
        assert len(dumped_events) == len(events)

    def test_unknown_version_rejected(self):
        with pytest.raises(TraceFormatError):
            parse_trace('{"trace_version": 9}\n')

    def test_malformed_rejected(self):
        with pytest.raises(TraceFormatError):
            parse_trace("")
        with pytest.raises(TraceFormatError):
            parse_trace('{"trace_version": 1}\nnot json\n')
