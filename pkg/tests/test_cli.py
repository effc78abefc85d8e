import json

import pytest

from rmwb import __version__
from rmwb.cli import main
from rmwb.corpus import fire_twice_table, random_ground
from rmwb.families import parse_family, serialize_family, trivial_family
from rmwb.forcing import serialize_functional, serialize_ground, serialize_table
from rmwb.instances import Coloring, Tournament, parse_instance, random_instance, serialize_instance
from rmwb.reductions import coloring_to_tournament, parse_solution

from engineered import settle_case


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def manifest(err):
    return json.loads(err.strip().splitlines()[-1])


def put(tmp_path, name, data):
    path = tmp_path / name
    path.write_bytes(data if isinstance(data, bytes) else data.encode())
    return path


# ---------------------------------------------------------------- instances and reductions


def test_gen_then_solve(tmp_path, capsys):
    code, out, err = run(capsys, "gen", "--kind", "coloring", "--n", 8, "--seed", 5)
    assert code == 0 and parse_instance(out.encode()) == random_instance("coloring", 8, 5)
    m = manifest(err)
    assert m["outcome"] == 0 and m["seed"] == 5 and m["version"] == __version__
    path = put(tmp_path, "c.rmwb", out)
    code, out, err = run(capsys, "solve", "--problem", "homogeneous", "-i", path)
    assert code == 0
    sol = parse_solution(out.encode())
    assert len(sol.vertices) >= 3
    assert str(path) in manifest(err)["inputs"]


def test_reduce_round_trip_complements(tmp_path, capsys):
    c = random_instance("coloring", 9, 2)
    path = put(tmp_path, "c.rmwb", serialize_instance(c))
    code, out, _ = run(capsys, "reduce", "--rule", "col2tour", "-i", path)
    assert code == 0 and isinstance(parse_instance(out.encode()), Tournament)
    tpath = put(tmp_path, "t.rmwb", out)
    code, out, _ = run(capsys, "reduce", "--rule", "tour2col", "-i", tpath)
    back = parse_instance(out.encode())
    assert code == 0 and isinstance(back, Coloring)
    assert back.bits == tuple(1 - b for b in c.bits)


def test_pullback_transitive_to_homogeneous(tmp_path, capsys):
    c = random_instance("coloring", 10, 7)
    cpath = put(tmp_path, "c.rmwb", serialize_instance(c))
    run(capsys, "reduce", "--rule", "col2tour", "-i", cpath, "-o", tmp_path / "t.rmwb")
    _, out, _ = run(capsys, "solve", "--problem", "transitive", "-i", tmp_path / "t.rmwb")
    spath = put(tmp_path, "s.sol", out)
    code, out, _ = run(capsys, "pullback", "--rule", "trans2hom", "-i", cpath, "--solution", spath)
    assert code == 0 and parse_solution(out.encode()).vertices


def test_pullback_rejects_wrong_solution(tmp_path, capsys):
    # a claimed transitive set that is a 3-cycle in the translated tournament
    c = next(x for x in (random_instance("coloring", 6, s) for s in range(100))
             if not coloring_to_tournament(x).is_transitive((0, 1, 2)))
    cpath = put(tmp_path, "c.rmwb", serialize_instance(c))
    spath = put(tmp_path, "s.sol", "rmwb-sol v1\nkind transitive\n0 1 2\n")
    code, _, err = run(capsys, "pullback", "--rule", "trans2hom", "-i", cpath, "--solution", spath)
    assert code == 1 and "FAIL" in err


def test_verify_reductions(capsys):
    for kind in ("coloring", "poset", "linorder"):
        code, out, _ = run(capsys, "verify", "reductions", "--kind", kind, "--n", 7, "--count", 20, "--jobs", 2)
        assert code == 0 and "verified" in out


# ---------------------------------------------------------------- malformed input


def test_malformed_file_exits_2(tmp_path, capsys):
    path = put(tmp_path, "bad.rmwb", "rmwb v1\nkind coloring\nn 3\nbits 1x0\n")
    code, _, err = run(capsys, "solve", "--problem", "homogeneous", "-i", path)
    assert code == 2 and "malformed" in err
    assert manifest(err)["outcome"] == 2


def test_missing_file_and_wrong_kind_exit_2(tmp_path, capsys):
    assert run(capsys, "solve", "--problem", "chain", "-i", tmp_path / "nope")[0] == 2
    path = put(tmp_path, "c.rmwb", serialize_instance(random_instance("coloring", 4, 0)))
    assert run(capsys, "solve", "--problem", "transitive", "-i", path)[0] == 2


def test_unknown_subcommand_exits_2(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 2 and manifest(err)["outcome"] == 2


def test_manifest_file(tmp_path, capsys):
    mpath = tmp_path / "m.json"
    code, _, err = run(capsys, "gen", "--kind", "poset", "--n", 5, "--manifest", mpath)
    assert code == 0
    m = json.loads(mpath.read_text())
    assert set(m) == {"argv", "inputs", "seed", "version", "outcome"}
    assert m["argv"][:3] == ["gen", "--kind", "poset"]


# ---------------------------------------------------------------- families


def test_family_validate_split_refine(tmp_path, capsys):
    t = Tournament.from_function(12, lambda i, j: i > j)
    fpath = put(tmp_path, "f.fam", serialize_family(trivial_family(t, 10)))
    assert run(capsys, "family", "validate", "-i", fpath)[0] == 0
    code, out, _ = run(capsys, "verify", "family-split", "-i", fpath, "--level", 1, "--set", "0,1")
    assert code == 0 and "split verified" in out
    code, out, _ = run(capsys, "family", "refine", "-i", fpath, "--map", "parity")
    assert code == 0 and parse_family(out.encode()).depth >= 1


def test_shallow_family_exits_3(tmp_path, capsys):
    t = Tournament.from_function(5, lambda i, j: i > j)
    fpath = put(tmp_path, "f.fam", serialize_family(trivial_family(t, 4)))
    code, _, err = run(capsys, "family", "refine", "-i", fpath, "--map", "mod:1", "--depth", 1)
    assert code == 3 and manifest(err)["outcome"] == 3


# ---------------------------------------------------------------- forcing


def settle_files(tmp_path, kind, seed):
    q, table, bounds = settle_case(kind, seed)
    fpath = put(tmp_path, "f.fam", serialize_family(q.family))
    tpath = put(tmp_path, "t.req", serialize_table(table))
    args = ["--family", fpath, "--table", tpath, "--x-range", bounds.x_range,
            "--set-bound", bounds.set_bound, "--level-bound", bounds.level_bound]
    if bounds.b_star is not None:
        args += ["--b-star", ",".join(map(str, sorted(bounds.b_star)))]
    return args


@pytest.mark.parametrize("kind, code", [("non-essential", 0), ("dense", 0), ("no-density", 1)])
def test_settle_outcomes(tmp_path, capsys, kind, code):
    args = settle_files(tmp_path, kind, 3)
    assert run(capsys, "verify", "settle", *args)[0] == code
    assert run(capsys, "forcing", "settle", *args)[0] == code


def test_ground_decide_and_diag(tmp_path, capsys):
    cond = random_ground("coloring", 8, 4)
    gpath = put(tmp_path, "g.ground", serialize_ground(cond))
    code, out, _ = run(capsys, "forcing", "decide", "-i", gpath, "--vertex", 8)
    assert code == 0 and out.startswith("rmwb-ground v1")
    tpath = put(tmp_path, "t.fun", serialize_functional(fire_twice_table(cond, 4)))
    assert run(capsys, "forcing", "diag", "-i", gpath, "--table", tpath)[0] == 0
    assert run(capsys, "forcing", "diag", "-i", gpath, "--table", tpath, "--budget", 0)[0] == 3


def test_forcing_tree(capsys):
    code, out, _ = run(capsys, "forcing", "tree", "--chain", "{1}", "{1,2}", "{1,2,3}")
    assert code == 0 and out.startswith("case ")


# ---------------------------------------------------------------- constructions and formats


@pytest.mark.parametrize("which, suite", [("klsw", "klsw-suite"), ("dkls", "dkls-suite")])
def test_construct_then_verify(tmp_path, capsys, which, suite):
    trace = tmp_path / "run.trace"
    code, out, _ = run(capsys, "construct", which, "--builtin", suite, "--horizon", 150, "--trace", trace)
    assert code == 0 and isinstance(parse_instance(out.encode()), Tournament)
    tpath = put(tmp_path, "t.rmwb", out)
    code, out, _ = run(capsys, "verify", which, "--trace", trace, "-i", tpath, "--e", 0, 1, 2, 3)
    assert code == 0 and out.count("requirement") == 4
    assert run(capsys, "verify", which, "--trace", trace)[0] == 0


def test_verify_detects_foreign_tournament(tmp_path, capsys):
    trace = tmp_path / "run.trace"
    run(capsys, "construct", "klsw", "--builtin", "klsw-suite", "--horizon", 40, "--trace", trace)
    other = put(tmp_path, "o.rmwb", serialize_instance(random_instance("tournament", 40, 1)))
    assert run(capsys, "verify", "klsw", "--trace", trace, "-i", other)[0] == 2


def test_construct_rejects_wrong_adversaries(capsys):
    assert run(capsys, "construct", "klsw", "--builtin", "dkls-suite", "--horizon", 10)[0] == 2


def test_verify_format(tmp_path, capsys):
    good = put(tmp_path, "g.rmwb", serialize_instance(random_instance("linorder", 6, 2)))
    code, out, _ = run(capsys, "verify", "format", "-i", good)
    assert code == 0 and "canonical" in out
    bad = put(tmp_path, "b.rmwb", "what is this\n")
    assert run(capsys, "verify", "format", "-i", bad)[0] == 2
