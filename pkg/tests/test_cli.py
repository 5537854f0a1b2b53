import pytest
from click.testing import CliRunner

from assocmdl.cli import fold_indices, main
from assocmdl.modelio import load_pair, load_tcm, pair_extras
from assocmdl.oracle import attachment_suite
from assocmdl.taxonomy import parse_taxonomy

from conftest import BIRDS, FLY, MARGINAL


@pytest.fixture
def toy(tmp_path):
    tax = tmp_path / "birds.tax"
    tax.write_text(BIRDS + "\n")
    triples = tmp_path / "triples.tsv"
    lines = [f"fly\tsubj\t{w}\t{c}" for w, c in FLY.items()]
    lines += [f"eat\tsubj\t{w}\t{MARGINAL[w] - c}" for w, c in FLY.items()]
    triples.write_text("\n".join(lines) + "\n")
    return tmp_path, tax, triples


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args], catch_exceptions=False)


class TestFit:
    def test_toy_corpus(self, toy):
        d, tax, triples = toy
        r = run("fit", "--taxonomy", tax, "--triples", triples, "--out", d / "m")
        assert r.exit_code == 0, r.output
        t = parse_taxonomy(BIRDS)
        marginal = load_tcm(t, (d / "m" / "subj" / "marginal.tcm").read_text())
        assert marginal.cut == t.leaf_cut()
        text = (d / "m" / "subj" / "fly.atcm").read_text()
        pm = load_pair(t, text)
        assert pm.assoc.cut.labels(t) == ["BIRD"]
        assert pm.assoc.a == pytest.approx((1.0,))
        assert abs(float(pair_extras(text)["residual"])) <= 1e-9
        assert (d / "m" / "subj" / "conditional" / "fly.tcm").exists()
        assert (d / "m" / "fit_summary.tsv").read_text().splitlines()[1].startswith("subj\teat\t105")

    def test_byte_identical_rerun(self, toy):
        d, tax, triples = toy
        for out in ("a", "b"):
            assert run("fit", "--taxonomy", tax, "--triples", triples, "--out", d / out, "--seed", 3).exit_code == 0
        files = sorted(p.relative_to(d / "a") for p in (d / "a").rglob("*") if p.is_file())
        assert files
        for f in files:
            assert (d / "a" / f).read_bytes() == (d / "b" / f).read_bytes()

    def test_unknown_only(self, toy):
        d, tax, _ = toy
        bad = d / "bad.tsv"
        bad.write_text("fly\tsubj\tplane\t3\n")
        r = run("fit", "--taxonomy", tax, "--triples", bad, "--out", d / "m")
        assert r.exit_code != 0
        assert "empty usable sample" in r.output

    def test_missing_file(self, toy):
        d, tax, _ = toy
        r = run("fit", "--taxonomy", tax, "--triples", d / "nope.tsv")
        assert r.exit_code != 0 and "no such file" in r.output

    def test_slot_filter(self, toy):
        d, tax, triples = toy
        r = run("fit", "--taxonomy", tax, "--triples", triples, "--slot", "obj", "--out", d / "m")
        assert r.exit_code != 0


def write_suite(d, su):
    tax = d / "suite.tax"
    tax.write_text(su.taxonomy.to_sexpr() + "\n")
    triples = d / "suite.tsv"
    triples.write_text("".join(f"{k.head}\t{k.slot}\t{w}\t{c}\n" for (w, k), c in sorted(su.sample.counts.items())))
    quads = d / "quads.tsv"
    quads.write_text("".join(f"{q.verb}\t{q.noun1}\t{q.prep}\t{q.noun2}\t{q.gold}\n" for q in su.quads))
    return tax, triples, quads


class TestEval:
    def test_planted_benchmark(self, tmp_path):
        su = attachment_suite(2, n_per_head=3000, n_quads=120)
        tax, triples, quads = write_suite(tmp_path, su)
        out = tmp_path / "out"
        assert run("fit", "--taxonomy", tax, "--triples", triples, "--out", out).exit_code == 0
        r = run("eval", "--taxonomy", tax, "--triples", triples, "--quads", quads, "--out", out)
        assert r.exit_code == 0, r.output
        rows = {line.split("\t")[0]: line.split("\t")[1:] for line in r.output.splitlines()[1:]}
        assert set(rows) == {"Default", "MDL", "SA", "Assoc"}
        assert rows["Assoc"] == ["100.0", "100.0"]
        for m in ("MDL", "SA", "Assoc"):
            curve = (out / f"curve_{m}.tsv").read_text().splitlines()
            assert curve[1].startswith("inf\t0.000000")
            covs = [float(line.split("\t")[1]) for line in curve[1:]]
            assert covs == sorted(covs)
        folds = (out / "folds.tsv").read_text().splitlines()[1:]
        sizes = [int(line.split("\t")[2]) for line in folds if line.split("\t")[1] == "Assoc"]
        assert len(sizes) == 10 and sum(sizes) == 120
        assert (out / "break_even.tsv").exists()

    def test_all_undecided(self, toy):
        d, tax, triples = toy
        out = d / "out"
        assert run("fit", "--taxonomy", tax, "--triples", triples, "--out", out).exit_code == 0
        quads = d / "q.tsv"
        quads.write_text("walk\trun\tsubj\tcrow\tV\n" * 4)
        r = run("eval", "--taxonomy", tax, "--triples", triples, "--quads", quads, "--out", out, "--folds", 2)
        assert r.exit_code == 0
        assert "Assoc\t0.0\tNA" in r.output

    def test_missing_models(self, toy):
        d, tax, triples = toy
        quads = d / "q.tsv"
        quads.write_text("fly\teat\tsubj\tcrow\tV\n")
        r = run("eval", "--taxonomy", tax, "--triples", triples, "--quads", quads, "--out", d / "none")
        assert r.exit_code != 0 and "missing models" in r.output

    def test_ascending_thresholds(self, toy):
        d, tax, triples = toy
        quads = d / "q.tsv"
        quads.write_text("fly\teat\tsubj\tcrow\tV\n")
        r = run("eval", "--taxonomy", tax, "--triples", triples, "--quads", quads, "--thresholds", "0,1")
        assert r.exit_code != 0 and "descending" in r.output


@pytest.mark.parametrize("n", [1, 9, 10, 11, 57, 100])
def test_fold_sizes(n):
    folds = fold_indices(n, 10, seed=0)
    sizes = [len(f) for f in folds]
    assert sum(sizes) == n
    assert max(sizes) - min(sizes) <= 1
    assert sorted(i for f in folds for i in f) == list(range(n))
    assert [list(f) for f in fold_indices(n, 10, seed=0)] == [list(f) for f in folds]


class TestVerify:
    def test_passes(self):
        r = run("verify", "--instances", 30, "--grid", 5)
        assert r.exit_code == 0, r.output
        assert r.output.count("PASS") == 4

    def test_mutation_fails(self):
        r = CliRunner().invoke(main, ["verify", "--grid", "3", "--mutate"])
        assert r.exit_code == 1
        assert "FAIL  marginal" in r.output and "FAIL  association" in r.output

    def test_cap_notice(self):
        r = run("verify", "--instances", 20, "--grid", 2, "--cap", 6)
        assert r.exit_code == 0
        assert "notice: cap 6" in r.output
        assert "skipped (enumeration cap 6)" in r.output
