"""Тесты для пакета cluster: модели времени и энергии, память, распределённый ствол, гибридный прогон."""
import dataclasses
import json
import os
import sys
import tempfile
import unittest

import numpy as np

sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))
from circuit.network import TensorNetworkGraph
from cluster import (INTER, INTRA, BufferPool, CapacityError, ClusterSpec, DeviceExecutor, DistTensor,
                     MessageRouter, PartitionExhaustedError, RecomputeError, choose_halving_label, gather_to_devices,
                     hybrid_execute, load_cluster, model_all2all_time, model_energy, recompute_execute,
                     swap_partition)
from planner import ContractionPlan, ShardOverflowError, StepType, contract_tree, cost, find_stem, left_deep_tree
from quantizer import int4_scheme
from tensors import DenseTensor, Precision, fidelity, permute

QUAD = ClusterSpec.preset("quad")
DESK = ClusterSpec.preset("desk")


def random_tensor(rng, labels, dims=None):
    shape = [2] * len(labels) if dims is None else dims
    return DenseTensor.from_array(rng.standard_normal(shape) + 1j * rng.standard_normal(shape), labels)


def stem_network(seed=0):
    """Тензор на 11 модах x0…x10 и три матрицы, сворачивающие x0, x1, x2."""
    rng = np.random.default_rng(seed)
    big = random_tensor(rng, [f"x{i}" for i in range(11)])
    gates = [random_tensor(rng, [f"x{i}", f"y{i}"]) for i in range(3)]
    open_legs = tuple(f"x{i}" for i in range(3, 11)) + ("y0", "y1", "y2")
    return TensorNetworkGraph((big,) + tuple(gates), open_legs)


def stem_plan(network, n_inter=0, n_intra=0):
    tree = left_deep_tree(network.n_tensors)
    stem = find_stem(tree, network).with_modes(n_inter, n_intra)
    return ContractionPlan(tree, stem, cost(tree, network))


class TestCostModel(unittest.TestCase):
    def test_all2all_examples(self):
        self.assertAlmostEqual(model_all2all_time(1e9, 300e9, 8, 0.5), 7.619047619e-3, places=11)
        self.assertAlmostEqual(model_all2all_time(2 ** 30, 300e9, 8, 0.5), 8.1806e-3, places=6)
        self.assertEqual(model_all2all_time(0, 300e9, 8, 0.5), 0.0)
        self.assertAlmostEqual(model_all2all_time(1e9, 100e9, 2, 1.0), model_all2all_time(1e9, 100e9, 2, 0.5) / 2)

    def test_all2all_errors(self):
        for args in ((1e9, 300e9, 1, 0.5), (1e9, 0, 4, 0.5), (1e9, 300e9, 4, 0), (1e9, 300e9, 4, 1.5),
                     (-1, 300e9, 4, 0.5)):
            with self.subTest(args=args):
                with self.assertRaises(ValueError):
                    model_all2all_time(*args)

    def test_energy(self):
        beta = 220.0
        self.assertEqual(model_energy(0.0, 2.0, beta / 3, beta), 2.0 * beta)
        self.assertAlmostEqual(model_energy(1.5, 1.5, beta / 3, beta), 4.0 / 3.0 * beta * 1.5)
        self.assertAlmostEqual(model_energy(3.0, 6.0, 10.0, 20.0), 3 * model_energy(1.0, 2.0, 10.0, 20.0))
        with self.assertRaises(ValueError):
            model_energy(-1.0, 1.0, 1.0, 1.0)


class TestClusterSpec(unittest.TestCase):
    def test_presets(self):
        self.assertEqual(QUAD.total_devices, 4)
        self.assertAlmostEqual(QUAD.alpha / QUAD.beta, 1.0 / 3.0)
        with self.assertRaises(ValueError):
            ClusterSpec.preset("mainframe")

    def test_json_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "cluster.json")
            with open(path, "w", encoding="utf-8") as f:
                json.dump({"nodes": 4, "devices_per_node": 8, "device_mem": 1 << 20}, f)
            spec = load_cluster(path)
        self.assertEqual((spec.nodes, spec.devices_per_node, spec.device_mem), (4, 8, 1 << 20))
        self.assertEqual(load_cluster("quad"), QUAD)

    def test_invalid(self):
        for kwargs in (dict(nodes=0), dict(r=1.5), dict(inter_bw=-1), dict(alpha=-1)):
            with self.subTest(kwargs=kwargs):
                with self.assertRaises(ValueError):
                    ClusterSpec(**kwargs)
        with self.assertRaises(ValueError):
            ClusterSpec.from_json({"nodes": 2, "gpus": 8})


class TestBufferPool(unittest.TestCase):
    def test_stem_ping_pong(self):
        pool = BufferPool(1000)
        for _ in range(3):
            pool.alloc(StepType.STEM, 400)
            pool.swap_stem_buffers()
        self.assertEqual(pool.stem_outputs, [0, 1, 0])
        self.assertEqual(pool.stem_buffer_count, 2)
        self.assertEqual(pool.stem_peak_bytes, 800)

    def test_stem_over_capacity(self):
        with self.assertRaises(CapacityError):
            BufferPool(1000).alloc(StepType.STEM, 1001)

    def test_split_from_fragments(self):
        pool = BufferPool(1000)
        pool.alloc(StepType.STEM, 400)
        handle = pool.alloc(StepType.SPLIT, 300)
        self.assertEqual((handle.buffer, handle.offset), (0, 400))
        self.assertEqual(pool.stem_buffer_count, 1)
        pool.free(handle)
        again = pool.alloc(StepType.SPLIT, 200)
        self.assertEqual((again.buffer, again.offset), (0, 400))
        with self.assertRaises(CapacityError):
            pool.alloc(StepType.SPLIT, 1001)
        self.assertTrue(pool.split_chunks_inside_buffers())

    def test_fragments_survive_release(self):
        pool = BufferPool(1000)
        pool.alloc(StepType.STEM, 100)
        pool.free(pool.alloc(StepType.SPLIT, 300))
        table = pool.chunk_table
        pool.release_stem()
        self.assertEqual(pool.chunk_table, table)
        self.assertEqual(pool.stem_out, 0)

    def test_live_chunk_protected(self):
        pool = BufferPool(1000)
        pool.alloc(StepType.STEM, 100)
        pool.swap_stem_buffers()
        pool.alloc(StepType.STEM, 100)
        pool.swap_stem_buffers()
        pool.alloc(StepType.SPLIT, 300)
        with self.assertRaises(CapacityError):
            pool.alloc(StepType.STEM, 50)

    def test_arena(self):
        pool = BufferPool(1000, arena_capacity=100)
        handle = pool.alloc(StepType.COMMON, 80)
        self.assertEqual(pool.arena_live, 80)
        with self.assertRaises(CapacityError):
            pool.alloc(StepType.COMMON, 30)
        pool.free(handle)
        self.assertEqual(pool.arena_live, 0)
        self.assertEqual(pool.stem_buffer_count, 0)


class TestDistTensor(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.t = random_tensor(np.random.default_rng(3), ["a", "b", "c", "d", "e"])

    def test_scatter_gather(self):
        dt = DistTensor.scatter(self.t, ["b"], ["d"])
        self.assertEqual(len(dt.shards), 4)
        self.assertEqual(dt.local_labels, ("a", "c", "e"))
        self.assertEqual(dt.shard_nbytes * 4, self.t.nbytes)
        np.testing.assert_array_equal(permute(dt.gather(), self.t.labels).data, self.t.data)

    def test_swap_preserves_content(self):
        router = MessageRouter()
        dt = DistTensor.scatter(self.t, ["a"], ["b"])
        dt = swap_partition(dt, INTER, {"a"}, router)
        self.assertEqual(dt.inter_labels, ("c",))
        dt = swap_partition(dt, INTRA, {"b"}, router)
        self.assertEqual(dt.intra_labels, ("a",))
        np.testing.assert_array_equal(permute(dt.gather(), self.t.labels).data, self.t.data)
        traffic = router.drain()
        piece = self.t.nbytes // 8
        self.assertEqual(traffic["bytes_inter"], 4 * piece)
        self.assertEqual(traffic["max_inter"], 2 * piece)
        self.assertEqual(traffic["bytes_intra"], 4 * piece)
        self.assertEqual(router.drain()["bytes_inter"], 0)

    def test_exhausted(self):
        dt = DistTensor.scatter(random_tensor(np.random.default_rng(0), ["a", "b", "c"]), ["a"], ["b"])
        with self.assertRaises(PartitionExhaustedError):
            swap_partition(dt, INTER, {"a", "c"}, MessageRouter())

    def test_scatter_requires_binary_modes(self):
        t = random_tensor(np.random.default_rng(0), ["a", "b"], [3, 2])
        with self.assertRaises(ValueError):
            DistTensor.scatter(t, ["a"], [])

    def test_quantized_router(self):
        router = MessageRouter(int4_scheme())
        t = random_tensor(np.random.default_rng(4), [f"m{i}" for i in range(10)])
        dt = DistTensor.scatter(t, ["m0"], ["m1"])
        swap_partition(dt, INTER, {"m0"}, router)
        self.assertEqual(router.compression_rate(INTER), 14.0625)
        self.assertIsNone(router.compression_rate(INTRA))

    def test_gather_is_lossless(self):
        router = MessageRouter(int4_scheme(), int4_scheme())
        dt = DistTensor.scatter(self.t, ["a"], ["b"])
        full = gather_to_devices(dt, router)
        np.testing.assert_array_equal(permute(full, self.t.labels).data, self.t.data)
        self.assertIsNone(router.compression_rate(INTER))
        self.assertGreater(router.drain()["bytes_inter"], 0)


class TestDeviceExecutor(unittest.TestCase):
    def test_order(self):
        items = list(range(17))
        for workers in (None, 1, 4):
            with self.subTest(workers=workers):
                self.assertEqual(DeviceExecutor(workers).map(lambda x: x * x, items), [x * x for x in items])
        self.assertEqual(DeviceExecutor().map(abs, []), [])

    def test_error_propagates(self):
        def fail(x):
            if x == 3:
                raise RuntimeError("device 3 failed")
            return x
        with self.assertRaises(RuntimeError):
            DeviceExecutor(4).map(fail, list(range(6)))


class TestHybridExecute(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.network = stem_network()
        cls.tree = left_deep_tree(cls.network.n_tensors)
        cls.benchmark = contract_tree(cls.network, cls.tree)
        cls.plan = stem_plan(cls.network, 1, 1)
        cls.result, cls.report = hybrid_execute(cls.plan, cls.network, QUAD)

    def test_single_device_identical(self):
        result, report = hybrid_execute(stem_plan(self.network), self.network, DESK)
        np.testing.assert_array_equal(result.data, self.benchmark.data)
        self.assertEqual(report.bytes_inter + report.bytes_intra, 0)
        self.assertEqual(report.t_comm, 0)

    def test_quad_bit_identical(self):
        self.assertEqual(self.result.labels, self.network.open_legs)
        np.testing.assert_array_equal(self.result.data, self.benchmark.data)

    def test_swaps_in_trace(self):
        self.assertEqual([r["swaps"] for r in self.report.rows], [[], [INTER], [INTRA]])
        self.assertGreater(self.report.rows[1]["bytes_inter"], 0)
        self.assertEqual(self.report.rows[2]["bytes_inter"], 0)
        self.assertGreater(self.report.rows[2]["bytes_intra"], 0)

    def test_sharded_calc_time(self):
        row = self.report.rows[0]
        self.assertAlmostEqual(row["t_calc"], row["flops"] / QUAD.compute_rate)
        self.assertAlmostEqual(row["seconds"], row["t_calc"] / 4)

    def test_int4_inter(self):
        result, report = hybrid_execute(self.plan, self.network, QUAD, int4_scheme())
        self.assertEqual(report.compression_rate, 14.0625)
        self.assertGreaterEqual(fidelity(self.result, result), 0.95)
        self.assertEqual(report.bytes_inter, self.report.bytes_inter * 0.140625)
        self.assertAlmostEqual(report.t_inter, self.report.t_inter * 0.140625)
        self.assertEqual(report.bytes_intra, self.report.bytes_intra)

    def test_energy_identity(self):
        r = self.report
        self.assertAlmostEqual(r.energy, r.alpha * (r.t_inter + r.t_intra) + r.beta * r.t_calc, places=15)
        self.assertAlmostEqual(sum(row["joules"] for row in r.rows), r.energy, places=15)
        totals = r.to_json()["totals"]
        self.assertEqual(totals["t_calc"], sum(row["t_calc"] for row in r.rows))

    def test_deterministic(self):
        _, again = hybrid_execute(self.plan, self.network, QUAD, executor=DeviceExecutor(1))
        self.assertEqual(json.dumps(again.to_json(), sort_keys=True), json.dumps(self.report.to_json(), sort_keys=True))

    def test_two_stem_buffers(self):
        self.assertEqual(self.report.stem_buffers, 2)
        self.assertEqual(self.report.stem_outputs, [0, 1, 0])

    def test_split_root(self):
        plan = self.plan.with_split_nodes({self.tree.root}, self.network)
        result, report = hybrid_execute(plan, self.network, QUAD)
        self.assertEqual(report.rows[-1]["type"], StepType.SPLIT.value)
        self.assertTrue(any(e["type"] == StepType.SPLIT.value for e in report.memory_trace))
        np.testing.assert_allclose(result.data, self.benchmark.data, rtol=1e-6, atol=1e-6)

    def test_chalf(self):
        result, report = hybrid_execute(self.plan, self.network, QUAD, precision=Precision.CHALF)
        self.assertIs(result.precision, Precision.CHALF)
        self.assertGreater(fidelity(self.benchmark, result), 0.99)
        self.assertEqual(report.config["precision"], "chalf")

    def test_errors(self):
        with self.assertRaises(ValueError):
            hybrid_execute(self.plan, self.network, DESK)
        with self.assertRaises(ShardOverflowError):
            hybrid_execute(self.plan, self.network, QUAD, device_mem=2048)

    def test_seeded_workloads_bit_identical(self):
        for seed in range(20):
            with self.subTest(seed=seed):
                network = stem_network(seed)
                benchmark = contract_tree(network, left_deep_tree(network.n_tensors))
                result, _ = hybrid_execute(stem_plan(network, 1, 1), network, QUAD)
                np.testing.assert_array_equal(result.data, benchmark.data)

    def test_small_stem_output_runs_replicated(self):
        rng = np.random.default_rng(0)
        ks = [f"k{i}" for i in range(8)]
        x = random_tensor(rng, list("abcdefgh") + ["i"])
        y = random_tensor(rng, list("abcdefgh") + ["j"])
        z = random_tensor(rng, ["i", "j"] + ks)
        network = TensorNetworkGraph((x, y, z), tuple(ks))
        plan = stem_plan(network)
        self.assertEqual(plan.step_type(4), StepType.COMMON)
        result, report = hybrid_execute(plan, network, DESK)
        self.assertEqual([r["type"] for r in report.rows], [StepType.STEM.value, StepType.COMMON.value])
        self.assertEqual(report.stem_outputs, [0])
        np.testing.assert_allclose(result.data, contract_tree(network, left_deep_tree(3)).data, rtol=1e-5, atol=1e-4)


class TestRecompute(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.network = stem_network(1)
        cls.plan = stem_plan(cls.network)
        cls.baseline, cls.base_report = hybrid_execute(cls.plan, cls.network, DESK)

    def test_halving_label(self):
        self.assertEqual(choose_halving_label(self.plan, self.network), "x3")

    def test_equal_to_baseline(self):
        result, report = recompute_execute(self.plan, self.network, DESK)
        self.assertEqual(result.labels, self.baseline.labels)
        np.testing.assert_array_equal(result.data, self.baseline.data)
        self.assertAlmostEqual(report.fidelity, 1.0, places=12)

    def test_half_memory(self):
        _, report = recompute_execute(self.plan, self.network, DESK)
        self.assertLessEqual(report.stem_peak_bytes, 0.5 * self.base_report.stem_peak_bytes)
        self.assertEqual(report.config["recompute"]["half_mode"], "x3")
        self.assertEqual(report.n_inter_effective, 0)
        self.assertEqual(len(report.rows), 2 * len(self.base_report.rows))

    def test_closed_label(self):
        result, _ = recompute_execute(self.plan, self.network, DESK, "x0")
        np.testing.assert_allclose(result.data, self.baseline.data, rtol=1e-6, atol=1e-6)

    def test_bad_label(self):
        with self.assertRaises(RecomputeError):
            recompute_execute(self.plan, self.network, DESK, "zz")

    def test_communication_in_region(self):
        with self.assertRaises(RecomputeError):
            recompute_execute(stem_plan(self.network, 1, 1), self.network, QUAD)


if __name__ == '__main__':
    unittest.main(verbosity=2)
