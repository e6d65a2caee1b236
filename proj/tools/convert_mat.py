#!/usr/bin/env python3
"""Convert a MATLAB benchmark file into the text layout `puon` reads.

    convert_mat.py Fdataset_ms.mat data/gottlieb

Writes association.txt (drugs x diseases, 0/1), drug_sim.txt, disease_sim.txt,
drug_ids.txt and disease_ids.txt. Ids come from the file's name variables
when present, otherwise they are D<i> / S<j>.
Variable names default to the ones used by the public drug-repositioning
benchmarks (didr, drug, disease, Wrname, Wdname); override them with flags.
"""

import argparse
import pathlib
import sys

import numpy as np
import scipy.io


def names(value):
    flat = np.asarray(value).ravel()
    out = []
    for item in flat:
        while isinstance(item, np.ndarray):
            item = item.ravel()[0] if item.size else ""
        out.append(str(item).strip())
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("mat")
    ap.add_argument("out")
    ap.add_argument("--assoc", default="didr")
    ap.add_argument("--drug-sim", default="drug")
    ap.add_argument("--disease-sim", default="disease")
    ap.add_argument("--drug-names", default="Wrname")
    ap.add_argument("--disease-names", default="Wdname")
    args = ap.parse_args()

    mat = scipy.io.loadmat(args.mat)
    for key in (args.assoc, args.drug_sim, args.disease_sim):
        if key not in mat:
            sys.exit(f"{args.mat}: no variable '{key}' (have {sorted(k for k in mat if not k.startswith('__'))})")

    assoc = np.asarray(mat[args.assoc])
    if hasattr(assoc, "toarray"):
        assoc = assoc.toarray()
    drug_sim = np.asarray(mat[args.drug_sim], dtype=float)
    disease_sim = np.asarray(mat[args.disease_sim], dtype=float)
    m, n = drug_sim.shape[0], disease_sim.shape[0]
    # The benchmarks store didr as diseases x drugs.
    if assoc.shape == (n, m) and assoc.shape != (m, n):
        assoc = assoc.T
    if assoc.shape != (m, n):
        sys.exit(f"association shape {assoc.shape} fits neither ({m}, {n}) nor its transpose")

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(out / "association.txt", (assoc != 0).astype(int), fmt="%d")
    np.savetxt(out / "drug_sim.txt", drug_sim, fmt="%.10g")
    np.savetxt(out / "disease_sim.txt", disease_sim, fmt="%.10g")
    for key, fname, size, prefix in ((args.drug_names, "drug_ids.txt", m, "D"),
                                     (args.disease_names, "disease_ids.txt", n, "S")):
        ids = names(mat[key]) if key in mat else []
        if len(ids) != size or len(set(ids)) != size or "" in ids:
            ids = [f"{prefix}{k}" for k in range(size)]
        (out / fname).write_text("\n".join(ids) + "\n")
    print(f"{out}: {m} drugs, {n} diseases, {int((assoc != 0).sum())} associations")


if __name__ == "__main__":
    main()
