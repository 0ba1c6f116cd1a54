"""mutafuzz: evaluate fuzzers by mutation analysis on MiniLang targets.

The harness mutates small target programs, runs its built-in fuzzers
against the surviving mutants through a staged pipeline (coverage phase,
seed minimization, static kill pass, per-supermutant campaigns), and
reports kill curves, minimal mutant sets, richness estimates, and residual
risk. All progress is measured in virtual time (target executions), so
runs are deterministic and machine-independent.
"""

__version__ = "0.1.0"
