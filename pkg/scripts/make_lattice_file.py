"""Write the bundled generating vector by CBC search (weights 1/l)."""
import argparse
import os

from lowdisc.cbc import CbcConfig, cbc_search

p = argparse.ArgumentParser()
p.add_argument("--m", type=int, default=14)
p.add_argument("--d", type=int, default=64)
args = p.parse_args()
res = cbc_search(CbcConfig(2 ** args.m, args.d))
out = os.path.join(os.path.dirname(__file__), "..", "src", "lowdisc", "data", "lattice_default.txt")
with open(out, "w") as fh:
    fh.write(f"# CBC for n = 2^{args.m}, weights 1/l, shift-invariant kernel\n# j h_j\n")
    for j, h in enumerate(res.h, 1):
        fh.write(f"{j} {h}\n")
print(res.h[:8], res.trace[-1])
