import json
import logging
import shutil
import tempfile
import unittest
from pathlib import Path
import sys

from typer.testing import CliRunner

# Ensure the project root is on sys.path so 'app' package is importable
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from app.main import app
from tests.helpers import DATA_DIR, HOMES_DIR, SCRIPTS_DIR

DESK = str(DATA_DIR / "configs" / "desk.json")


class TestCli(unittest.TestCase):
    """Command-line surface"""

    def setUp(self):
        self.runner = CliRunner()
        self.tmp = Path(tempfile.mkdtemp())
        self.handlers = list(logging.getLogger().handlers)
        self.level = logging.getLogger().level

    def tearDown(self):
        root = logging.getLogger()
        for handler in list(root.handlers):
            root.removeHandler(handler)
        for handler in self.handlers:
            root.addHandler(handler)
        root.setLevel(self.level)
        shutil.rmtree(self.tmp, ignore_errors=True)

    def invoke(self, *args):
        return self.runner.invoke(app, ["--log-level", "WARNING", *args])

    def test_instrument(self):
        out = self.tmp / "sensors.json"
        result = self.invoke("instrument", "--layout", str(HOMES_DIR / "home_a.json"), "--out", str(out))
        self.assertEqual(result.exit_code, 0, result.output)
        document = json.loads(out.read_text(encoding="utf-8"))
        self.assertEqual(sum(s["kind"] == "Motion" for s in document["sensors"]), 4)

    def test_missing_layout_exits_with_error(self):
        result = self.invoke("instrument", "--layout", str(self.tmp / "missing.json"))
        self.assertEqual(result.exit_code, 1)
        self.assertIn("error:", result.output)

    def test_bad_log_format(self):
        result = self.runner.invoke(app, ["--log-format", "xml", "stats", "--windows", "x"])
        self.assertEqual(result.exit_code, 2)

    def test_ground_then_simulate(self):
        grounded = self.tmp / "grounded.txt"
        report = self.tmp / "report.json"
        result = self.invoke(
            "ground", "--layout", str(HOMES_DIR / "home_a.json"), "--script", str(SCRIPTS_DIR / "home_a" / "day1.txt"),
            "--config", DESK, "--out", str(grounded), "--report", str(report),
        )
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertTrue(grounded.read_text(encoding="utf-8").strip())
        self.assertTrue(json.loads(report.read_text(encoding="utf-8"))["blocks"])

        trajectory = self.tmp / "trajectory.csv"
        transitions = self.tmp / "transitions.jsonl"
        result = self.invoke(
            "simulate", "--layout", str(HOMES_DIR / "home_a.json"), "--script", str(grounded), "--dt", "1.0",
            "--out-traj", str(trajectory), "--out-transitions", str(transitions),
        )
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertTrue(trajectory.read_text(encoding="utf-8").startswith("t,x,y,z,step_index"))
        self.assertTrue(transitions.is_file())

    def test_generate_stats_export(self):
        out = self.tmp / "virtual"
        result = self.invoke(
            "generate", "--config", DESK, "--layout", str(HOMES_DIR / "home_b.json"),
            "--script", str(SCRIPTS_DIR / "home_b" / "day1.txt"), "--out", str(out),
        )
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertTrue((out / "events.casas").is_file())

        result = self.invoke("stats", "--windows", str(out / "windows.jsonl"), "--out", str(self.tmp / "stats.json"))
        self.assertEqual(result.exit_code, 0, result.output)
        stats = json.loads((self.tmp / "stats.json").read_text(encoding="utf-8"))
        self.assertGreater(stats["window_count"], 0)

        exported = self.tmp / "events.jsonl"
        result = self.invoke(
            "export", "--events", str(out / "events.casas"), "--sensors", str(out / "sensors.json"),
            "--format", "jsonl", "--out", str(exported),
        )
        self.assertEqual(result.exit_code, 0, result.output)
        first = json.loads(exported.read_text(encoding="utf-8").splitlines()[0])
        self.assertIn(first["kind"], {"Motion", "Door", "Device"})
        self.assertNotEqual(first["room"], "")


if __name__ == "__main__":
    unittest.main()
