#!/usr/bin/env python3
"""Benchmark the compiled kernels against their pure-Python builds.

Covers both hot kernels: the MiniLang execution engine and the splitmix64
generator. Each workload is also cross-checked for identical results, since
the two builds must be interchangeable bit for bit.
"""

import argparse
import time

from mutafuzz.minilang import _vm as vm_pure
from mutafuzz._rng import SplitMix64 as PureRng
from mutafuzz.minilang import parse
from mutafuzz.targets import target_source

try:
    from mutafuzz.minilang import _vm_compiled as vm_compiled
except ImportError:
    vm_compiled = None
try:
    from mutafuzz._rng_compiled import SplitMix64 as CompiledRng
except ImportError:
    CompiledRng = None


def _run_engine(run_vm, ir, inputs, fuel):
    results = []
    start = time.perf_counter()
    for data in inputs:
        results.append(
            run_vm(
                ir.ops,
                ir.consts,
                ir.func_entry,
                ir.func_argc,
                ir.func_nslots,
                ir.func_arrays,
                ir.main_idx,
                data,
                fuel,
                None,
            )
        )
    return time.perf_counter() - start, results


def bench_vm(execs: int) -> None:
    program = parse(target_source("magic_gate"), "magic_gate")
    ir = program.ir()
    rng = PureRng(20260809)
    inputs = [rng.bytes(rng.below(7)) for _ in range(execs)]
    pure_time, pure_results = _run_engine(vm_pure.run_vm, ir, inputs, 2048)
    print(f"engine/pure      {execs / pure_time:10.0f} execs/s")
    if vm_compiled is None:
        print("engine/compiled  (extension not built)")
        return
    comp_time, comp_results = _run_engine(vm_compiled.run_vm, ir, inputs, 2048)
    assert pure_results == comp_results, "engine builds disagree"
    print(f"engine/compiled  {execs / comp_time:10.0f} execs/s"
          f"   ({pure_time / comp_time:.2f}x)")


def bench_rng(draws: int) -> None:
    pure = PureRng(99)
    start = time.perf_counter()
    for _ in range(draws):
        pure.below(256)
    pure_time = time.perf_counter() - start
    print(f"rng/pure         {draws / pure_time:10.0f} draws/s")
    if CompiledRng is None:
        print("rng/compiled     (extension not built)")
        return
    comp = CompiledRng(99)
    start = time.perf_counter()
    for _ in range(draws):
        comp.below(256)
    comp_time = time.perf_counter() - start
    a, b = PureRng(7), CompiledRng(7)
    assert all(a.next_u64() == b.next_u64() for _ in range(10000)), "rng builds disagree"
    print(f"rng/compiled     {draws / comp_time:10.0f} draws/s"
          f"   ({pure_time / comp_time:.2f}x)")


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--execs", type=int, default=50_000,
                        help="engine workload size (default: %(default)d)")
    parser.add_argument("--draws", type=int, default=2_000_000,
                        help="rng workload size (default: %(default)d)")
    args = parser.parse_args()
    bench_vm(args.execs)
    bench_rng(args.draws)


if __name__ == "__main__":
    main()
