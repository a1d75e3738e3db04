"""Convergence of the L1 and WSGL schemes on the scalar relaxation benchmark.

Run with ``python3 demos/convergence_tables.py``; prints markdown tables.
"""

from __future__ import annotations

from tempfrac.harness import StudySpec, emit_table, run_study

LADDER = (160, 320, 640, 1280, 2560, 5120)


def main() -> None:
    studies = {
        "L1, alpha=0.8, graded": StudySpec("benchmark", LADDER, 0.8, 0.5, "L1", norm="max_time"),
        "L1, alpha=0.4, uniform": StudySpec("benchmark", LADDER, 0.4, 0.5, "L1", r=1.0, norm="max_time"),
        "WSGL m=2, alpha=0.8": StudySpec("benchmark", LADDER, 0.8, 0.5, "WSGL", m=2, norm="max_time"),
    }
    for title, spec in studies.items():
        print(f"\n{title}\n")
        print(emit_table(run_study(spec), "markdown").decode())


if __name__ == "__main__":
    main()
