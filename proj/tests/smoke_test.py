"""Smoke checks for the _depwise extension module."""

import _depwise as dw


def test_labels():
    labels = dw.labels()
    assert len(labels) == 9
    assert "above" in labels and "overlap" in labels


def test_generate_fields_and_determinism():
    insts = dw.generate(seed=42, k=3, noise="irrelevant", n=5)
    assert len(insts) == 5
    for inst in insts:
        assert set(inst) == {"triples", "sentences", "question", "gold", "k", "noise", "seed"}
        assert inst["k"] == 3
        assert inst["noise"] == "irrelevant"
        assert len(inst["sentences"]) == len(inst["triples"])
    again = dw.generate(seed=42, k=3, noise="irrelevant", n=5)
    assert insts == again


def test_render_parse_round_trip():
    inst = dw.generate(seed=7, k=4, noise="supporting", n=1)[0]
    story = dw.parse(dw.render(inst))
    assert story["triples"] == inst["triples"]
    assert story["question"] == inst["question"]


def test_parse_error_carries_value_error():
    try:
        dw.parse("this is not a story sentence\n")
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")


def test_exact_prediction_matches_gold():
    for noise in ("none", "disconnected", "irrelevant", "supporting"):
        for k in (1, 2, 5):
            for inst in dw.generate(seed=11, k=k, noise=noise, n=9):
                assert dw.predict_exact(inst) == inst["gold"], (noise, k)


def test_compose():
    assert dw.compose(["above", "above"]) == "above"
    assert dw.compose(["above", "below"]) == "overlap"
    assert dw.compose(["left", "above"]) == "upper-left"
    try:
        dw.compose(["sideways"])
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")


def test_trace_fields():
    inst = dw.generate(seed=3, k=3, noise="none", n=1)[0]
    trace = dw.trace(inst)
    assert trace["has_path"]
    assert trace["path"][0] == inst["question"][0]
    assert trace["path"][-1] == inst["question"][1]
    assert len(trace["hop_offsets"]) == 3
    composed = tuple(map(sum, zip(*trace["hop_offsets"])))
    assert composed == trace["composed"]
    assert trace["predicted"] == inst["gold"]
    assert trace["filler_norm"] > 0


def test_props():
    results = dw.run_props("bfs")
    assert results and all(r["pass"] for r in results)


def main():
    checks = [v for name, v in sorted(globals().items()) if name.startswith("test_")]
    for check in checks:
        check()
        print(f"ok {check.__name__}")
    print(f"{len(checks)} smoke checks passed")


if __name__ == "__main__":
    main()
