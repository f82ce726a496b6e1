import math
from typing import Any, Dict, List, Tuple

from config.sim_config import FIDELITY_THRESHOLD

_TOTAL_KEYS = ("t_calc", "t_inter", "t_intra", "bytes_inter", "bytes_intra", "seconds")


def _as_dict(report) -> Dict[str, Any]:
    return report.to_json() if hasattr(report, "to_json") else report


def _close(a: float, b: float, rel: float = 1e-9) -> bool:
    return math.isclose(a, b, rel_tol=rel, abs_tol=1e-300)


class Checker:
    def check_energy(self, report) -> Tuple[bool, float, float]:
        """Проверить тождество energy = α·T_comm + β·T_calc и сумму джоулей по строкам."""
        data = _as_dict(report)
        totals = data["totals"]
        expected = data["alpha"] * (totals["t_inter"] + totals["t_intra"]) + data["beta"] * totals["t_calc"]
        rows_sum = sum(r["joules"] for r in data["rows"])
        ok = _close(totals["energy"], expected) and _close(totals["energy"], rows_sum)
        return ok, totals["energy"], rows_sum

    def check_totals(self, report) -> Tuple[bool, List[str]]:
        """Проверить, что итоги равны суммам строк трассы."""
        data = _as_dict(report)
        bad = [k for k in _TOTAL_KEYS if not _close(data["totals"][k], sum(r[k] for r in data["rows"]))]
        return len(bad) == 0, bad

    def check_stem_buffers(self, report) -> Tuple[bool, List[Dict[str, Any]]]:
        """Не больше двух буферов ствола; выход каждого шага ствола пишется в другой буфер."""
        data = _as_dict(report)
        problems: List[Dict[str, Any]] = []
        if data["stem_buffers"] > 2:
            problems.append({"problem": "too_many_buffers", "count": data["stem_buffers"]})
        expected = 0
        for i, entry in enumerate(data.get("memory_trace", [])):
            if entry["op"] == "release":
                expected = 0
            elif entry["op"] == "alloc" and entry["type"] == "stem":
                if entry["buffer"] != expected:
                    problems.append({"problem": "no_alternation", "trace_index": i, "buffer": entry["buffer"]})
                expected = 1 - entry["buffer"]
        return len(problems) == 0, problems

    def check_split_chunks(self, report) -> Tuple[bool, List[int]]:
        """Split-чанки лежат внутри адресного диапазона буферов."""
        data = _as_dict(report)
        capacity = data.get("config", {}).get("cluster", {}).get("buffer_capacity")
        if capacity is None:
            return True, []
        bad = [i for i, e in enumerate(data.get("memory_trace", []))
               if e["op"] == "alloc" and e["type"] == "split" and e["offset"] + e["size"] > capacity]
        return len(bad) == 0, bad

    def check_fidelity(self, report, threshold: float = FIDELITY_THRESHOLD) -> bool:
        fidelity = _as_dict(report).get("fidelity")
        return fidelity is None or fidelity >= threshold

    def check_report(self, report, *, threshold: float = FIDELITY_THRESHOLD) -> Dict[str, Any]:
        """Комплексная проверка отчёта о прогоне."""
        energy_ok, energy, rows_energy = self.check_energy(report)
        totals_ok, bad_totals = self.check_totals(report)
        buffers_ok, buffer_problems = self.check_stem_buffers(report)
        chunks_ok, bad_chunks = self.check_split_chunks(report)
        fidelity_ok = self.check_fidelity(report, threshold)
        all_ok = energy_ok and totals_ok and buffers_ok and chunks_ok and fidelity_ok

        return {
            "all_ok": all_ok,
            "energy_ok": energy_ok,
            "energy": energy,
            "rows_energy": rows_energy,
            "totals_ok": totals_ok,
            "bad_totals": bad_totals,
            "buffers_ok": buffers_ok,
            "buffer_problems": buffer_problems,
            "chunks_ok": chunks_ok,
            "bad_chunks": bad_chunks,
            "fidelity_ok": fidelity_ok,
        }
