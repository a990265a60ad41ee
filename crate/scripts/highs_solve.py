#!/usr/bin/env python3
"""Solve an MPS file with HiGHS and write a `name value` solution file.

usage: highs_solve.py model.mps solution.txt
"""
import sys

import highspy


def main():
    mps, out = sys.argv[1], sys.argv[2]
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 1e-12)
    h.setOptionValue("primal_feasibility_tolerance", 1e-9)
    h.setOptionValue("mip_feasibility_tolerance", 1e-9)
    h.readModel(mps)
    h.run()
    status = h.modelStatusToString(h.getModelStatus())
    with open(out, "w") as f:
        f.write(f"# status {status}\n")
        if status != "Optimal":
            return
        info = h.getInfo()
        f.write(f"=obj= {info.objective_function_value!r}\n")
        values = h.getSolution().col_value
        lp = h.getLp()
        for name, value in zip(lp.col_names_, values):
            f.write(f"{name} {value!r}\n")


if __name__ == "__main__":
    main()
