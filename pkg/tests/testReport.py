"""Тесты для пакета report: проверки отчёта о прогоне и текстовый отчёт."""
import copy
import os
import sys
import tempfile
import unittest

sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))
from circuit import circuit_to_network, random_circuit
from cluster import ClusterSpec, hybrid_execute
from planner import build_plan
from report import Checker, Reporter


def sample_report():
    row = {"t_calc": 1.0, "t_inter": 0.5, "t_intra": 0.25, "bytes_inter": 10.0, "bytes_intra": 20.0,
           "seconds": 1.75, "joules": 3.75}
    return {
        "totals": {"t_calc": 2.0, "t_inter": 1.0, "t_intra": 0.5, "seconds": 3.5, "energy": 7.5,
                   "bytes_inter": 20.0, "bytes_intra": 40.0},
        "n_inter": 1,
        "n_intra": 1,
        "n_inter_effective": 1,
        "n_subtasks": 1,
        "alpha": 1.0,
        "beta": 3.0,
        "stem_buffers": 2,
        "stem_outputs": [0, 1, 0],
        "compression_rate": 14.0625,
        "fidelity": 0.99,
        "config": {"cluster": {"buffer_capacity": 100}},
        "rows": [dict(row), dict(row)],
        "memory_trace": [
            {"op": "alloc", "type": "stem", "buffer": 0, "offset": 0, "size": 60},
            {"op": "alloc", "type": "stem", "buffer": 1, "offset": 0, "size": 60},
            {"op": "alloc", "type": "split", "buffer": 0, "offset": 60, "size": 40},
            {"op": "release"},
            {"op": "alloc", "type": "stem", "buffer": 0, "offset": 0, "size": 60},
        ],
    }


class TestChecker(unittest.TestCase):
    def setUp(self):
        self.checker = Checker()
        self.report = sample_report()

    def test_good_report(self):
        result = self.checker.check_report(self.report)
        self.assertTrue(result["all_ok"])
        self.assertEqual(result["energy"], 7.5)

    def test_energy_identity_broken(self):
        self.report["totals"]["energy"] = 8.0
        ok, energy, rows_energy = self.checker.check_energy(self.report)
        self.assertFalse(ok)
        self.assertEqual((energy, rows_energy), (8.0, 7.5))

    def test_totals_mismatch(self):
        self.report["totals"]["bytes_inter"] = 21.0
        self.assertEqual(self.checker.check_totals(self.report), (False, ["bytes_inter"]))

    def test_stem_buffers(self):
        cases = {
            "too_many_buffers": lambda r: r.update(stem_buffers=3),
            "no_alternation": lambda r: r["memory_trace"][1].update(buffer=0),
        }
        for problem, mutate in cases.items():
            with self.subTest(problem=problem):
                report = copy.deepcopy(self.report)
                mutate(report)
                ok, problems = self.checker.check_stem_buffers(report)
                self.assertFalse(ok)
                self.assertEqual(problems[0]["problem"], problem)

    def test_split_chunk_outside(self):
        self.report["memory_trace"][2]["size"] = 41
        self.assertEqual(self.checker.check_split_chunks(self.report), (False, [2]))
        del self.report["config"]["cluster"]
        self.assertEqual(self.checker.check_split_chunks(self.report), (True, []))

    def test_fidelity_threshold(self):
        self.assertTrue(self.checker.check_fidelity(self.report))
        self.assertFalse(self.checker.check_fidelity(self.report, threshold=0.995))
        self.report["fidelity"] = None
        self.assertTrue(self.checker.check_fidelity(self.report, threshold=0.995))

    def test_simulated_run(self):
        network = circuit_to_network(random_circuit(5, 4, seed=3))
        desk = ClusterSpec.preset("desk")
        plan = build_plan(network, 1 << 20, desk, seed=0, iterations=50)
        _, report = hybrid_execute(plan, network, desk)
        result = self.checker.check_report(report)
        self.assertTrue(result["all_ok"], result)


class TestReporter(unittest.TestCase):
    def test_all_ok(self):
        text = Reporter().get_report(sample_report())
        self.assertIn("Все проверки пройдены.", text)
        self.assertIn("N_inter=1", text)
        self.assertIn("14.0625%", text)

    def test_problems_listed(self):
        report = sample_report()
        report["totals"]["energy"] = 8.0
        report["fidelity"] = 0.5
        text = Reporter().get_report(report)
        self.assertNotIn("Все проверки пройдены.", text)
        self.assertIn("Нарушено тождество энергии", text)
        self.assertIn("Точность ниже порога 0.95", text)

    def test_custom_threshold(self):
        detailed = Reporter(threshold=0.999).get_detailed_report(sample_report())
        self.assertFalse(detailed["all_ok"])
        self.assertFalse(detailed["fidelity_ok"])

    def test_save_report(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Reporter().save_report(sample_report(), os.path.join(tmp, "report.txt"))
            with open(path, "r", encoding="utf-8") as f:
                self.assertIn("Энергия", f.read())


if __name__ == '__main__':
    unittest.main(verbosity=2)
