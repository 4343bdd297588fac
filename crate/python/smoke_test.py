#!/usr/bin/env python3
"""Smoke test for the ganet_py extension module.

Builds nothing itself: it looks for the compiled cdylib under target/
(release preferred), copies it next to a temp dir as ganet_py.so, imports
it, and exercises the main surface. Build first with either

    cargo build -p ganet-py --release

or maturin, then run:  python3 python/smoke_test.py
"""

import json
import math
import os
import shutil
import sys
import tempfile

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def locate_extension():
    candidates = [
        os.path.join(REPO, "target", "release", "libganet_py.so"),
        os.path.join(REPO, "target", "debug", "libganet_py.so"),
        os.path.join(REPO, "target", "release", "libganet_py.dylib"),
        os.path.join(REPO, "target", "debug", "libganet_py.dylib"),
    ]
    for path in candidates:
        if os.path.exists(path):
            return path
    sys.exit("no built extension found; run `cargo build -p ganet-py` first")


def import_module():
    src = locate_extension()
    tmp = tempfile.mkdtemp(prefix="ganet_py_")
    dst = os.path.join(tmp, "ganet_py.so")
    shutil.copyfile(src, dst)
    sys.path.insert(0, tmp)
    import ganet_py  # noqa: E402

    return ganet_py


def approx(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    gp = import_module()

    # Graph construction and round trip.
    g = gp.Graph.generate_sbm(blocks=[20, 20], p_in=0.9, p_out=0.05, noise=0.3, seed=7)
    assert g.num_nodes == 40 and g.channels == 2, repr(g)
    assert g.labels == [0] * 20 + [1] * 20
    back = gp.Graph.from_json(g.to_json())
    assert back.edge_count == g.edge_count

    looped = g.add_self_loops()
    assert looped.edge_count == g.edge_count + 40
    assert 0 in looped.neighbors(0)

    # Operators. Single self-loop node passes features through gao.
    tiny = gp.Graph(1, [], [[2.5]]).add_self_loops()
    out = gp.gao_forward([[2.5]], tiny)
    assert approx(out[0][0], 2.5), out

    # hgao on one node: sigmoid-gated passthrough.
    out = gp.hgao_forward([[3.0]], tiny, p=[2.0], k=4)
    gate = 1.0 / (1.0 + math.exp(-3.0))
    assert approx(out[0][0], gate * 3.0), out

    # cgao with a single channel is the identity.
    out = gp.cgao_forward([[1.5, -2.0, 0.25]])
    assert out == [[1.5, -2.0, 0.25]], out

    # Cost model hits the published reference values.
    assert gp.count_madd("gao", 1000, 48) == 100_608_000
    assert gp.count_madd("cgao", 10_000, 48) == 92_160_000
    assert gp.model_memory("gao", 10_000, 48) == 409_600_000

    rows = gp.table3(skip_wall=True)
    assert len(rows) == 9
    gao_row = [r for r in rows if r["op"] == "gao" and r["n"] == 20_000][0]
    assert approx(gao_row["madd"] / 1e6, 38_492.16, tol=0.01)
    assert gao_row["ref_madd_m"] == 38_492.16

    # Gradients agree with finite differences.
    report = gp.gradcheck("hgao", nodes=6, channels=3, k=2, instances=5, seed=3)
    assert report["checked"] == 5 and report["max_rel_err"] < 1e-5, report

    # A short training run learns the two blocks.
    result = gp.train(g, attn="hgao", gams=2, hidden=8, k=4, epochs=60, patience=0, seed=1)
    assert result["epochs_run"] == 60
    assert result["final_test_acc"] >= 0.85, result["final_test_acc"]

    print(json.dumps({
        "graph": repr(g),
        "table3_rows": len(rows),
        "gradcheck_max_rel_err": report["max_rel_err"],
        "train_test_acc": result["final_test_acc"],
        "status": "ok",
    }, indent=2))


if __name__ == "__main__":
    main()
