import os
import sys
import json
import logging
import argparse

sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))

from cli import (RunConfig, cmd_plan, cmd_run, cmd_quant_sweep, cmd_oracle, exit_code_for, EXIT_OK, EXIT_USAGE)
from config.sim_config import ANNEAL_ITERATIONS, SAMPLER_MEM_LIMIT
from report import Reporter


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Моделирование тензорно-сетевого симулятора квантовых схем')
    parser.add_argument('--verbose', '-v', action='store_true', help='Подробный вывод')
    sub = parser.add_subparsers(dest='command', required=True)

    plan = sub.add_parser('plan', help='Поиск плана свёртки')
    plan.add_argument('--circuit', required=True, help='JSON схемы')
    plan.add_argument('--mem-limit', type=float, default=SAMPLER_MEM_LIMIT, help='Предел памяти, байт')
    plan.add_argument('--seed', type=int, default=0)
    plan.add_argument('--iters', type=int, default=ANNEAL_ITERATIONS, help='Итерации отжига')
    plan.add_argument('--cluster', default=None, help='JSON кластера или имя предустановки')
    plan.add_argument('--out', '-o', default=None, help='Куда сохранить план')

    run = sub.add_parser('run', help='Моделируемый прогон на кластере')
    run.add_argument('--circuit', required=True)
    run.add_argument('--cluster', default='desk')
    run.add_argument('--plan', default=None, help='Готовый план вместо поиска')
    run.add_argument('--mem-limit', type=float, default=SAMPLER_MEM_LIMIT)
    run.add_argument('--seed', type=int, default=0)
    run.add_argument('--iters', type=int, default=ANNEAL_ITERATIONS)
    run.add_argument('--quant', default='none', help='none | half | int8 | int4:<g>')
    run.add_argument('--intra-quant', default='none', help='Квантование внутри узла')
    run.add_argument('--precision', choices=['c64', 'chalf'], default='c64')
    run.add_argument('--recompute', action='store_true', help='Пересчёт больших шагов по половинам')
    run.add_argument('--verify', action='store_true', help='Сравнить с одноустройственным C64-эталоном')
    run.add_argument('--out', '-o', default=None, help='Куда сохранить отчёт')

    oracle = sub.add_parser('oracle', help='Амплитуды вектора состояния')
    oracle.add_argument('--circuit', required=True)
    oracle.add_argument('--bitstrings', nargs='*', default=None)
    oracle.add_argument('--out', '-o', default=None)

    sweep = sub.add_parser('quant-sweep', help='CR и точность схем квантования')
    sweep.add_argument('--source', default='gaussian:16384', help="gaussian:<n>, constant:<n> или JSON тензора")
    sweep.add_argument('--schemes', nargs='+', default=['half', 'int8', 'int4:128'])
    sweep.add_argument('--seed', type=int, default=0)
    sweep.add_argument('--out', '-o', default=None)
    return parser


def main(argv=None) -> int:
    """Главная функция для командной строки."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")

    try:
        if args.command == 'plan':
            obj = cmd_plan(args.circuit, args.mem_limit, args.seed, args.iters, args.cluster, args.out)
            print(json.dumps(obj["cost"], ensure_ascii=False, indent=4))
            return EXIT_OK
        if args.command == 'run':
            config = RunConfig(circuit=args.circuit, cluster=args.cluster, plan=args.plan, mem_limit=args.mem_limit,
                               seed=args.seed, iterations=args.iters, quant=args.quant,
                               intra_quant=args.intra_quant, precision=args.precision, recompute=args.recompute,
                               verify=args.verify, out=args.out)
            report, _, code = cmd_run(config)
            print(Reporter().get_report(report))
            return code
        if args.command == 'oracle':
            obj = cmd_oracle(args.circuit, args.bitstrings, args.out)
            if args.out is None:
                print(json.dumps(obj, ensure_ascii=False, indent=4))
            return EXIT_OK
        table = cmd_quant_sweep(args.source, args.schemes, args.seed, args.out)
        print(table.to_string(index=False))
        return EXIT_OK
    except Exception as e:
        logging.debug("Command failed", exc_info=True)
        print(f"Ошибка: {e}")
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
