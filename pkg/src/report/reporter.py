import os
from typing import Any, Dict

from config.sim_config import FIDELITY_THRESHOLD
from .checker import Checker, _as_dict


class Reporter:
    """Класс для генерации текстовых отчётов о моделируемом прогоне."""

    def __init__(self, threshold: float = FIDELITY_THRESHOLD):
        self.checker = Checker()
        self.threshold = threshold

    def get_summary(self, report) -> str:
        data = _as_dict(report)
        totals = data["totals"]
        lines = [
            f"Подзадач: {data['n_subtasks']}, N_inter={data['n_inter']} "
            f"(эффективно {data['n_inter_effective']}), N_intra={data['n_intra']}",
            f"T_calc={totals['t_calc']:.6e} с, T_inter={totals['t_inter']:.6e} с, T_intra={totals['t_intra']:.6e} с",
            f"Энергия: {totals['energy']:.6e} Дж",
            f"Байт между узлами: {totals['bytes_inter']:.0f}, внутри узлов: {totals['bytes_intra']:.0f}",
        ]
        if data.get("compression_rate") is not None:
            lines.append(f"CR межузлового трафика: {data['compression_rate']:.4f}%")
        if data.get("fidelity") is not None:
            lines.append(f"Точность относительно эталона: {data['fidelity']:.6f}")
        return os.linesep.join(lines)

    def get_report(self, report) -> str:
        """Сгенерировать текстовый отчёт: сводка и найденные проблемы."""
        check = self.checker.check_report(report, threshold=self.threshold)
        report_lines = [self.get_summary(report)]

        if check["all_ok"]:
            report_lines.append("Все проверки пройдены.")
            return os.linesep.join(report_lines)

        if not check["energy_ok"]:
            report_lines.append(f"Нарушено тождество энергии: {check['energy']:.6e} против {check['rows_energy']:.6e}")
        if not check["totals_ok"]:
            report_lines.append(f"Итоги не совпадают с суммой строк: {check['bad_totals']}")
        if not check["buffers_ok"]:
            report_lines.append(f"Проблемы с буферами ствола: {check['buffer_problems']}")
        if not check["chunks_ok"]:
            report_lines.append(f"Split-чанки вне буферов (записи трассы): {check['bad_chunks']}")
        if not check["fidelity_ok"]:
            report_lines.append(f"Точность ниже порога {self.threshold}")

        return os.linesep.join(report_lines)

    def get_detailed_report(self, report) -> Dict[str, Any]:
        """Получить подробный отчёт в виде словаря."""
        return self.checker.check_report(report, threshold=self.threshold)

    def save_report(self, report, output_path: str) -> str:
        """Сохранить отчёт в файл."""
        text = self.get_report(report)
        with open(output_path, "w", encoding="utf-8") as f:
            f.write(text)
        return output_path
