"""Тесты команд конвейера и разбора аргументов командной строки."""
import os
import sys
import tempfile
import unittest

import numpy as np
import pandas as pd

sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'notebooks'))
from circuit import random_circuit, serialize_circuit, statevector_oracle
from cli import (EXIT_INFEASIBLE, EXIT_OK, EXIT_OVERFLOW, EXIT_USAGE, EXIT_VERIFY, RunConfig, cmd_oracle, cmd_plan,
                 cmd_quant_sweep, cmd_run, exit_code_for)
from cluster import CapacityError, RecomputeError
from planner import InfeasiblePlanError, ShardOverflowError
from sparse_state import ChunkBudgetError
from utils.utils import load_json
import main as cli_main


class CliTestCase(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.circuit = random_circuit(4, 3, seed=0)
        cls.circuit_path = os.path.join(cls.tmp.name, "circuit.json")
        with open(cls.circuit_path, "w", encoding="utf-8") as f:
            f.write(serialize_circuit(cls.circuit))

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp.name, name)


class TestCmdPlan(CliTestCase):
    def test_plan_saved(self):
        obj = cmd_plan(self.circuit_path, 1 << 16, seed=0, iterations=50, cluster="desk", out=self.path("plan.json"))
        self.assertEqual(load_json(self.path("plan.json")), obj)
        self.assertEqual((obj["n_inter"], obj["n_intra"]), (0, 0))
        self.assertLessEqual(obj["cost"]["max_elements"] * obj["cost"]["dtype_bytes"], 1 << 16)

    def test_infeasible(self):
        with self.assertRaises(InfeasiblePlanError):
            cmd_plan(self.circuit_path, 64, iterations=10)


class TestCmdRun(CliTestCase):
    def test_verified_run(self):
        config = RunConfig(circuit=self.circuit_path, mem_limit=1 << 16, iterations=50, verify=True,
                           out=self.path("run.json"))
        report, result, code = cmd_run(config)
        self.assertEqual(code, EXIT_OK)
        self.assertAlmostEqual(report["fidelity"], 1.0, places=6)
        self.assertEqual(report["config"]["run"]["circuit"], self.circuit_path)
        self.assertEqual(load_json(self.path("run.json"))["result_hash"], report["result_hash"])
        self.assertEqual(sorted(result.shape), [2] * 4)

    def test_saved_plan(self):
        cmd_plan(self.circuit_path, 1 << 16, iterations=50, cluster="desk", out=self.path("plan_run.json"))
        config = RunConfig(circuit=self.circuit_path, plan=self.path("plan_run.json"), verify=True)
        report, _, code = cmd_run(config)
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(any(r["type"] == "split" for r in report["rows"]))

    def test_verify_threshold(self):
        config = RunConfig(circuit=self.circuit_path, mem_limit=1 << 16, iterations=50, verify=True, threshold=1.5)
        _, _, code = cmd_run(config)
        self.assertEqual(code, EXIT_VERIFY)

    def test_invalid_config(self):
        cases = [
            dict(circuit=self.path("missing.json")),
            dict(circuit=self.circuit_path, plan=self.path("missing_plan.json")),
            dict(circuit=self.circuit_path, quant="int3"),
            dict(circuit=self.circuit_path, precision="c128"),
            dict(circuit=self.circuit_path, mem_limit=0),
        ]
        for kwargs in cases:
            with self.subTest(kwargs=kwargs):
                with self.assertRaises(ValueError):
                    RunConfig(**kwargs)


class TestCmdOracle(CliTestCase):
    def test_all_amplitudes(self):
        obj = cmd_oracle(self.circuit_path)
        self.assertEqual(len(obj["bitstrings"]), 16)
        amps = np.array([complex(re, im) for re, im in obj["amplitudes"]])
        np.testing.assert_allclose(amps, statevector_oracle(self.circuit), atol=1e-12)

    def test_selected_saved(self):
        obj = cmd_oracle(self.circuit_path, ["0101", "1111"], out=self.path("oracle.json"))
        self.assertEqual(load_json(self.path("oracle.json"))["bitstrings"], ["0101", "1111"])
        self.assertEqual(len(obj["amplitudes"]), 2)
        with self.assertRaises(ValueError):
            cmd_oracle(self.circuit_path, ["01"])


class TestCmdQuantSweep(CliTestCase):
    def test_gaussian(self):
        table = cmd_quant_sweep("gaussian:4096", ["none", "half", "int8", "int4:128", "int4:64"])
        self.assertIsInstance(table, pd.DataFrame)
        self.assertEqual(list(table["scheme"]), ["half", "int8", "int4:128", "int4:64"])
        self.assertEqual(table.loc[table["scheme"] == "int4:128", "cr"].item(), 14.0625)
        self.assertTrue((table["fidelity"] >= 0.95).all())
        self.assertEqual(table.loc[0, "group"], "entire")

    def test_constant_exact(self):
        table = cmd_quant_sweep("constant:512")
        np.testing.assert_allclose(table["relative_fidelity"], 1.0)

    def test_csv_output(self):
        cmd_quant_sweep("gaussian:1024", out=self.path("sweep.csv"))
        self.assertEqual(len(pd.read_csv(self.path("sweep.csv"))), 3)

    def test_bad_source(self):
        for source in ("gaussian:x", "constant:0", self.path("nothing.json")):
            with self.subTest(source=source):
                with self.assertRaises(ValueError):
                    cmd_quant_sweep(source)


class TestExitCodes(CliTestCase):
    def test_exit_code_for(self):
        cases = [
            (InfeasiblePlanError("x"), EXIT_INFEASIBLE),
            (RecomputeError("x"), EXIT_INFEASIBLE),
            (ShardOverflowError("x"), EXIT_OVERFLOW),
            (CapacityError("x"), EXIT_OVERFLOW),
            (ChunkBudgetError("x"), EXIT_OVERFLOW),
            (MemoryError(), EXIT_OVERFLOW),
            (ValueError("x"), EXIT_USAGE),
        ]
        for exc, code in cases:
            with self.subTest(exc=type(exc).__name__):
                self.assertEqual(exit_code_for(exc), code)

    def test_main(self):
        cases = [
            ([], EXIT_USAGE),
            (["plan", "--circuit", self.circuit_path, "--mem-limit", "65536", "--iters", "20"], EXIT_OK),
            (["plan", "--circuit", self.circuit_path, "--mem-limit", "64", "--iters", "10"], EXIT_INFEASIBLE),
            (["run", "--circuit", self.path("missing.json")], EXIT_USAGE),
            (["oracle", "--circuit", self.circuit_path, "--bitstrings", "0000"], EXIT_OK),
            (["quant-sweep", "--source", "gaussian:256"], EXIT_OK),
        ]
        for argv, code in cases:
            with self.subTest(argv=argv):
                self.assertEqual(cli_main.main(argv), code)


if __name__ == '__main__':
    unittest.main(verbosity=2)
