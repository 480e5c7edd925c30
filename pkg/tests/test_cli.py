import io
import json
from pathlib import Path

import pytest

from geoglue.cli import MISMATCH, OK, PARSE, SEMANTIC, run

DATA = Path(__file__).resolve().parent.parent / "data"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    status = run([str(a) for a in argv], out, err)
    return status, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("kind,spec,golden", [
    ("localic", "p1", "t_p1"),
    ("zariski", "affine_z4", "affine_z4"),
    ("cris", "cris_z4", "cris_z4"),
])
def test_glue_reproduces_golden(kind, spec, golden):
    status, out, _ = call("glue", kind, DATA / f"specs/{spec}.spec")
    assert status == OK
    assert out == (DATA / f"golden/{golden}.theory").read_text()


def test_general_accepts_localic_spec():
    assert call("glue", "general", DATA / "specs/p1.spec")[1] == call("glue", "localic", DATA / "specs/p1.spec")[1]


def test_glue_kind_mismatch():
    status, _, err = call("glue", "zariski", DATA / "specs/p1.spec")
    assert status == SEMANTIC and "localic" in err


def test_zariski_p1_spec_glues():
    status, out, _ = call("glue", "zariski", DATA / "specs/p1_zariski.spec")
    assert status == OK and "R_c1" in out


def test_check_golden():
    status, out, _ = call("check", DATA / "golden/t_p1.theory")
    assert status == OK and out.startswith("ok: 1 sorts")


def test_check_missing_file():
    assert call("check", DATA / "nope.theory")[0] == PARSE


def test_check_bad_syntax(tmp_path):
    bad = tmp_path / "bad.theory"
    bad.write_text("sort A;\nfun f : A -> ;\n")
    status, _, err = call("check", bad)
    assert status == PARSE and "line 2" in err


def test_check_ill_formed(tmp_path):
    bad = tmp_path / "bad.theory"
    bad.write_text("sort A;\naxiom [x:A] true |- g(x) = x;\n")
    assert call("check", bad)[0] == SEMANTIC


def test_unknown_subcommand():
    assert call("frobnicate")[0] == PARSE


def test_z6_is_not_local():
    status, out, _ = call("model", "check", DATA / "models/z6.model", DATA / "theories/localring.theory")
    assert status == MISMATCH
    assert out.startswith("counterexample at point *: x1=3")


def test_z4_is_local():
    status, out, _ = call("model", "check", DATA / "models/z4.model", DATA / "theories/localring.theory")
    assert status == OK and out == "holds\n"


def test_schematic_loc_after_expansion():
    status, _, _ = call("--expand-schemas", 4, "model", "check", DATA / "models/z6.model",
                        DATA / "theories/localring_schematic.theory")
    assert status == MISMATCH


def test_enumerate_extensions():
    status, out, _ = call("model", "enum-ext", DATA / "models/empty.model", DATA / "exts/point.ext")
    assert status == OK and out.startswith("2 extensions up to isomorphism")


def test_diff_self_is_empty():
    t = DATA / "golden/t_p1.theory"
    assert call("diff", t, t) == (OK, "", "")


def test_diff_ignores_axiom_order(tmp_path):
    src = (DATA / "theories/ring.theory").read_text().splitlines(keepends=True)
    decls = [l for l in src if not l.startswith("axiom")]
    axioms = [l for l in src if l.startswith("axiom")]
    shuffled = tmp_path / "ring.theory"
    shuffled.write_text("".join(decls + axioms[::-1]))
    assert call("diff", DATA / "theories/ring.theory", shuffled)[0] == OK


def test_diff_finite_against_schematic():
    status, out, _ = call("diff", DATA / "theories/localring.theory", DATA / "theories/localring_schematic.theory")
    assert status == MISMATCH
    assert "+ schema loc[A] @loc_stable;" in out.splitlines()


def test_transform_desugar():
    status, out, _ = call("transform", "--desugar", DATA / "exts/unit.ext")
    assert status == OK and "rel R_c sub A;" in out


def test_transform_conditional_requires_relations():
    assert call("transform", "--conditional", "p", DATA / "exts/unit.ext")[0] == SEMANTIC


def test_transform_conditional(tmp_path):
    ext = tmp_path / "u.ext"
    ext.write_text(call("transform", "--desugar", DATA / "exts/unit.ext")[1])
    status, out, _ = call("transform", "--conditional", "q", ext)
    assert status == OK and "q" in out


def test_transform_sum():
    status, out, _ = call("transform", "--sum", DATA / "exts/point.ext", "--", DATA / "theories/ring.theory")
    assert status == OK and "rel p;" in out


@pytest.mark.parametrize("argv,expected", [
    (("pd", "eval", "g2(X)*g2(X)", "--degree", 4), "6*g4(X)\n"),
    (("pd", "eval", "X*X", "--degree", 4), "2*g2(X)\n"),
    (("pd", "gamma", "g2(X)", "--n", 2, "--degree", 4), "3*g4(X)\n"),
    (("pd", "gamma", "X+2", "--n", 2, "--base", "ZZ/4", "--ideal", 2), "2 + 2*X + g2(X)\n"),
    (("pd", "nil-witness", "X", "--base", "ZZ/2", "--degree", 8, "--n", 2, "--e", 2),
     "k = 2, bound = 3, coefficient = 3\n"),
])
def test_pd_commands(argv, expected):
    assert call(*argv)[:2] == (OK, expected)


def test_pd_axioms_modular():
    status, out, _ = call("pd", "axioms", "--base", "ZZ/4", "--ideal", 2)
    assert status == OK and out.startswith("all ")


def test_pd_axioms_bad_table():
    status, out, _ = call("pd", "axioms", "--base", "ZZ/4", "--ideal", 2, "--gamma", "1:2:2,2:2:2,3:2:0,4:2:0")
    assert status == MISMATCH and "composition at m=2, n=2, x=2" in out


def test_pd_gamma_outside_ideal():
    assert call("pd", "gamma", "1", "--base", "ZZ/4", "--ideal", 2)[0] == SEMANTIC


def test_topo_cosieve():
    status, out, _ = call("topo", "cosieve", "surjective-function", DATA / "models/fun_1_2.model", "--at", 0)
    assert status == OK and "1 generators" in out


def test_topo_rigidity():
    status, out, _ = call("topo", "rigidity", "surjective-function", DATA / "models/fun_0_1.model")
    assert status == OK and out.endswith("status: covered, steps: 1\n")


def test_topo_irreducible():
    assert call("topo", "irreducible", "surjective-function", DATA / "models/fun_0_1.model")[0] == MISMATCH
    assert call("topo", "irreducible", "surjective-function", DATA / "models/fun_1_2.model")[0] == MISMATCH


def test_json_report():
    status, _, err = call("--json", "model", "check", DATA / "models/z6.model", DATA / "theories/localring.theory")
    report = json.loads(err.splitlines()[-1])
    assert report["exit"] == status == MISMATCH
    assert report["assignment"] == {"x1": 3}


def test_outputs_are_deterministic():
    for argv in [("glue", "localic", DATA / "specs/p1.spec"), ("glue", "cris", DATA / "specs/cris_z4.spec")]:
        assert call(*argv) == call(*argv)
