"""Smoke test for the tabeval extension module. Run after `maturin develop`."""

import json

import tabeval

EXAMPLE = """\
|Year|Title|Role|Notes|
|----|-----|----|-----|
|2015|Kidnapped: The Hannah Anderson Story|Becca McKinnon|NaN|
|2015|Jem and the Holograms|Young Jerrica Benton|NaN|
|2015|Asomatous|Sophie Gibbs|NaN|
|2017|Unforgettable|Lily|NaN|
|2019|Our Friend|Molly|NaN|
"""


def main():
    gold = tabeval.Table.parse(EXAMPLE, "Isabella Rice - Film")
    assert len(gold) == 5
    assert gold.headers == ["Year", "Title", "Role", "Notes"]
    assert gold.rows[0][3] == ""

    statements = tabeval.unroll(gold)
    assert len(statements) == 10, statements
    text, rows = statements[0]
    assert text.startswith("For the Title Kidnapped"), text
    assert rows == [0]

    same = tabeval.tabeval_score(gold, gold)
    assert (same.precision, same.recall, same.f1) == (1.0, 1.0, 1.0)

    pred = tabeval.Table.parse(EXAMPLE.replace("Sophie Gibbs", "Sophie Grant"), "Isabella Rice - Film")
    corrupted = tabeval.tabeval_score(gold, pred)
    assert abs(corrupted.f1 - 0.9) < 1e-12, corrupted

    assert tabeval.chrf("abc", "abc") == 1.0
    assert tabeval.chrf("ab", "cd") == 0.0
    assert abs(tabeval.pearson([1, 2, 3], [1, 2, 4]) - 0.981981) < 1e-5
    assert tabeval.krippendorff_alpha([[1, 2, 3], [1, 2, 3]]) == 1.0

    exact = tabeval.baseline_score(gold, pred, "exact")
    assert 0.0 < exact.f1 < 1.0

    refs = json.dumps({"id": "rice", "intent": "Isabella Rice - Film", "table": EXAMPLE})
    preds = json.dumps({"id": "rice", "model_id": "m", "table": gold.to_markdown()})
    report = json.loads(tabeval.evaluate_corpus(refs, preds, parallelism=2))
    assert report["overall"]["tabeval"]["f1"] == 1.0

    try:
        tabeval.Table.parse("no table here")
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
