"""End-to-end checks of the spgp command line: outputs, schemas, determinism, exit codes."""

import csv
import filecmp
import json
import shutil
import subprocess
import sys
from pathlib import Path

import jsonschema
import numpy as np

CLI, SCHEMAS, WORK = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])
FAST = ["--epsilon", "0.02", "--t-max", "25", "--inner-max", "25"]
failures = []


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        failures.append(what)


def run(*args, expect=0):
    res = subprocess.run([CLI, *map(str, args)], capture_output=True, text=True)
    if res.returncode != expect:
        print(res.stdout, res.stderr)
    check(res.returncode == expect, f"exit {expect}: {' '.join(map(str, args[:2]))}")
    return res


def validate(path, schema):
    doc = json.loads(Path(path).read_text())
    try:
        jsonschema.validate(doc, json.loads((SCHEMAS / f"{schema}.schema.json").read_text()))
        check(True, f"{Path(path).name} matches {schema} schema")
    except jsonschema.ValidationError as e:
        check(False, f"{Path(path).name} matches {schema} schema: {e.message}")
    return doc


def write_csv(path, x, y):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow([f"x{i + 1}" for i in range(x.shape[1])] + ["y"])
        for row, v in zip(x, y):
            w.writerow([repr(float(a)) for a in row] + [repr(float(v))])


def same_files(a, b, names):
    for n in names:
        check(filecmp.cmp(a / n, b / n, shallow=False), f"{n} identical across reruns")


shutil.rmtree(WORK, ignore_errors=True)
WORK.mkdir(parents=True)

rng = np.random.default_rng(5)
x = rng.uniform(size=(80, 4))
y = np.sin(3.0 * (x[:, 0] - 0.5 * x[:, 2])) + 0.05 * rng.normal(size=80)
write_csv(WORK / "data.csv", x, y)
write_csv(WORK / "train.csv", x[:64], y[:64])
write_csv(WORK / "test.csv", x[64:], y[64:])

# fit
for d in ("fit_a", "fit_b"):
    run("fit", WORK / "data.csv", "--out-dir", WORK / d, "--q-max", 2, "--seed", 3, *FAST)
same_files(WORK / "fit_a", WORK / "fit_b", ["path.json", "model.json", "path_plot.csv"])
path = validate(WORK / "fit_a" / "path.json", "path")
model = validate(WORK / "fit_a" / "model.json", "model")
check(len(path["paths"]) == 2, "path file holds both ranks")
check(path["paths"][0]["entries"][0]["lambda"] == "inf", "initial lambda serialized as inf")
check(len(model["selected"]) <= 4, "model lists at most p inputs")
check(model["standardization"]["applied"], "inputs standardized by default")
with open(WORK / "fit_a" / "path_plot.csv") as f:
    header = next(csv.reader(f))
check(header == ["q", "t", "step_kind", "lambda", "gamma", "nll", "bic", "row", "s1", "s2", "s3", "s4"], "plot csv header")

# config file, with a flag taking precedence
(WORK / "cfg.json").write_text(json.dumps({"q_max": 1, "epsilon": 0.05, "t_max": 10, "standardize": False}))
run("fit", WORK / "data.csv", "--config", WORK / "cfg.json", "--t-max", 5, "--out-dir", WORK / "fit_cfg")
cfg_path = json.loads((WORK / "fit_cfg" / "path.json").read_text())
check(cfg_path["fseg"]["t_max"] == 5 and cfg_path["fseg"]["epsilon"] == 0.05, "flags override the config file")
check(len(cfg_path["paths"]) == 1, "config q_max applied")

# predict
run("predict", "--model", WORK / "fit_a" / "model.json", "--train", WORK / "train.csv", "--test", WORK / "test.csv",
    "--out-dir", WORK / "pred", "--refit-steps", 200)
scores = validate(WORK / "pred" / "scores.json", "scores")
check([r["model"] for r in scores["rows"]] == ["full", "reduced"], "scores rows are full then reduced")
with open(WORK / "pred" / "scores.csv") as f:
    rows = list(csv.DictReader(f))
check([r["model"] for r in rows] == ["full", "reduced"], "scores csv has two labelled rows")

# predicting on the training set with little noise fits it closely
run("predict", "--model", WORK / "fit_a" / "model.json", "--train", WORK / "data.csv", "--test", WORK / "data.csv",
    "--out-dir", WORK / "pred_self", "--refit-steps", 200)
self_scores = json.loads((WORK / "pred_self" / "scores.json").read_text())
check(all(r["mse"] < 0.05 * float(np.var(y)) for r in self_scores["rows"]), "in-sample MSE near zero")

# simulate
sim = ["simulate", "--grid-q", 1, "--grid-p0", 3, "--grid-sigma2", 0.01, "--replicates", 2, "--n", 40, "--q-max", 2,
       "--seed", 11, *FAST]
run(*sim, "--out-dir", WORK / "sim_a")
run(*sim, "--out-dir", WORK / "sim_b")
same_files(WORK / "sim_a", WORK / "sim_b", ["study.json", "study.csv"])
study = validate(WORK / "sim_a" / "study.json", "study")
check(all("seed" in r for r in study["scenarios"][0]["runs"]), "replicate seeds recorded")
with open(WORK / "sim_a" / "study.csv") as f:
    check(len(list(csv.DictReader(f))) == 1, "one scenario gives one csv row")

run("simulate", "--full-grid", "--replicates", 1, "--n", 12, "--q-max", 1, "--t-max", 1, "--epsilon", 0.05,
    "--out-dir", WORK / "sim_grid")
with open(WORK / "sim_grid" / "study.csv") as f:
    grid = list(csv.DictReader(f))
check(len(grid) == 27, "full grid gives 27 rows")
check(len({(r["q"], r["p0"], r["sigma2"]) for r in grid}) == 27, "grid rows are distinct scenarios")

# gradcheck
res = run("gradcheck", "--instances", 3)
check("max_rel_error=" in res.stdout, "gradcheck reports the max relative error")

# failures
(WORK / "noy.csv").write_text("x1,x2\n1,2\n3,4\n")
res = run("fit", WORK / "noy.csv", "--out-dir", WORK / "bad", expect=2)
check("'y'" in res.stderr, "missing y column named in the error")
check(not (WORK / "bad").exists() or not any((WORK / "bad").iterdir()), "no outputs left after a failed fit")
run("fit", WORK / "missing.csv", "--out-dir", WORK / "bad", expect=4)
run("fit", WORK / "data.csv", "--epsilon", -1, "--out-dir", WORK / "bad", expect=2)
run("fit", WORK / "data.csv", "--bogus", expect=2)
(WORK / "badcfg.json").write_text('{"epsilom": 1}')
run("fit", WORK / "data.csv", "--config", WORK / "badcfg.json", expect=2)
run("predict", "--model", WORK / "missing.json", "--train", WORK / "train.csv", "--test", WORK / "test.csv",
    "--out-dir", WORK / "bad", expect=4)
(WORK / "blocker").write_text("")
run("fit", WORK / "data.csv", "--out-dir", WORK / "blocker" / "sub", *FAST, expect=4)

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
