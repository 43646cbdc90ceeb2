import json
import random

import pytest

import gen
from classalgebra import document as doc
from classalgebra import probability as pb
from classalgebra.errors import (
    DocumentParseError,
    IntegrityError,
    VersionMismatchError,
)
from classalgebra.evaluate import Evaluator
from classalgebra.model import ClassRelation, CompositeRelation, Store
from classalgebra import syntax as sx


build_rich_store = gen.random_ontology_store


class TestRoundTrip:
    def test_byte_stability(self, tmp_path):
        for seed in range(15):
            st = build_rich_store(seed)
            p1 = tmp_path / f"a{seed}.json"
            p2 = tmp_path / f"b{seed}.json"
            doc.save(st, str(p1))
            doc.save(doc.load(str(p1)), str(p2))
            assert p1.read_bytes() == p2.read_bytes()

    def test_expression_reparses_to_stored_sdnf(self, tmp_path):
        st = Store()
        st.create_object({"age": [30]})
        st.define_class("adult", "any where age>=18 V age>=21")
        path = tmp_path / "x.json"
        doc.save(st, str(path))
        payload = json.loads(path.read_text())
        (cls,) = payload["classes"]
        st2 = Store()
        form = st2.define_class(cls["name"], cls["expression"])
        assert form.render() == st.classes["adult"].render()

    def test_probabilities_reproduce_exactly(self, tmp_path):
        st = build_rich_store(3)
        path = tmp_path / "x.json"
        doc.save(st, str(path))
        st2 = doc.load(str(path))
        s1, s2 = st.snapshot(), st2.snapshot()
        for name in st.classes:
            assert pb.probability(name, s1) == pb.probability(name, s2)

    def test_empty_document(self, tmp_path):
        st = Store()
        path = tmp_path / "empty.json"
        doc.save(st, str(path))
        st2 = doc.load(str(path))
        assert not st2.objects
        from classalgebra.errors import EmptyUniverseError

        with pytest.raises(EmptyUniverseError):
            pb.probability("any", st2.snapshot())


class TestErrors:
    def test_dangling_oid(self, tmp_path):
        payload = {
            "formatVersion": 1,
            "objects": [{"oid": 1, "attributes": {}}],
            "relations": [{"name": "owns", "variant": "explicit", "edges": [[1, 99]]}],
            "classes": [],
            "constraints": [],
            "virtualLedger": {"allocations": [], "movements": []},
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(IntegrityError) as err:
            doc.load(str(path))
        assert "99" in str(err.value)

    def test_version_mismatch(self, tmp_path):
        path = tmp_path / "v2.json"
        path.write_text(json.dumps({"formatVersion": 2}))
        with pytest.raises(VersionMismatchError):
            doc.load(str(path))

    def test_not_json(self, tmp_path):
        path = tmp_path / "junk.json"
        path.write_text("{nope")
        with pytest.raises(DocumentParseError):
            doc.load(str(path))
