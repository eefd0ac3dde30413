# Copyright 2026 The svsmlab Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes synthetic.jsonl: a run log whose compute-optimal runs follow
N_opt = 1e-2 * C^0.52 and D_opt = 1e-1 * C^0.47, with frontier loss
0.14 * (C / 1e17)^-0.23 below the knee and ^-0.12 above it.

Every other record sits strictly above the frontier, so fit-laws must
recover the exponents exactly (up to integer rounding of N and D).
"""

import json
import math
import pathlib

KNEE = 1e17


def frontier_loss(c):
    return 0.14 * (c / KNEE) ** (-0.23 if c < KNEE else -0.12)


def record(run_id, n, step, d, flops, loss):
    return {
        "run_id": run_id,
        "family": "svsm_encdec",
        "N": n,
        "step": step,
        "D": d,
        "flops": flops,
        "train_loss": loss * 1.02,
        "eval_loss": loss,
        "eval_psnr": 10.0 * math.log10(1.0 / loss),
        "eval_ssim": 0.5,
        "wall_seconds": float(step),
    }


def main():
    rows = []
    for i in range(17):
        c = 10.0 ** (15.0 + 0.25 * i)
        n = round(1e-2 * c**0.52)
        d_end = round(1e-1 * c**0.47)
        run = f"synth-opt-{i:02d}"
        # Early runs log only their end point: nothing smaller exists to dominate a partial record.
        for k in (1, 2, 3, 4) if i >= 3 else (4,):
            flops = c * k / 4
            loss = frontier_loss(c) if k == 4 else 1.5 * frontier_loss(flops / 10)
            rows.append(record(run, n, k * 1000, d_end * k // 4 if k < 4 else d_end, flops, loss))
        if i % 2 == 0:
            rows.append(record(f"synth-big-{i:02d}", 3 * n, 4000, d_end // 3, c, 1.1 * frontier_loss(c)))
    rows.sort(key=lambda r: (r["run_id"], r["step"]))
    out = pathlib.Path(__file__).with_name("synthetic.jsonl")
    out.write_text("".join(json.dumps(r, separators=(",", ":")) + "\n" for r in rows))


if __name__ == "__main__":
    main()
