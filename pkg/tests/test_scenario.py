import json

import pytest

from reflex_sm.scenario import (
    FIXTURE_NAMES,
    GroundTruthMapping,
    HeterogeneityBand,
    ParseError,
    Scenario,
    Schema,
    SchemaElement,
    Side,
    ValidationError,
    band_for_index,
    builtin_fixture,
    builtin_fixtures,
    heterogeneity_index,
    load_scenario,
    scenario_from_dict,
    scenario_to_dict,
)


def make_doc(**overrides):
    doc = {
        "name": "Tiny",
        "source": [{"id": "a", "name": "name"}, {"id": "b", "name": "price"}],
        "target": [{"id": "x", "name": "itemName"}, {"id": "y", "name": "itemPrice"}],
        "expected": [["a", "x"], ["b", "y"]],
        "band": "low",
    }
    doc.update(overrides)
    return doc


class TestLoadScenario:
    def test_load_valid_file(self, tmp_path):
        path = tmp_path / "tiny.json"
        path.write_text(json.dumps(make_doc()), encoding="utf-8")
        scenario = load_scenario(path)
        assert scenario.name == "Tiny"
        assert len(scenario.expected) == 2
        assert scenario.source.side is Side.SOURCE
        assert scenario.target.side is Side.TARGET

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ParseError):
            load_scenario(path)

    def test_unknown_top_level_key(self):
        with pytest.raises(ParseError, match="unknown"):
            scenario_from_dict(make_doc(extra_field=1))

    def test_unknown_element_key(self):
        doc = make_doc(source=[{"id": "a", "name": "name", "type": "str"}])
        with pytest.raises(ParseError, match="type"):
            scenario_from_dict(doc)

    def test_dangling_ground_truth_id(self):
        doc = make_doc(expected=[["a", "x9"]])
        with pytest.raises(ValidationError, match="x9"):
            scenario_from_dict(doc)

    def test_duplicate_element_id(self):
        doc = make_doc(source=[{"id": "a", "name": "n1"}, {"id": "a", "name": "n2"}])
        with pytest.raises(ValidationError, match="duplicate"):
            scenario_from_dict(doc)

    def test_empty_source(self):
        with pytest.raises((ValidationError, ParseError), match="empty"):
            scenario_from_dict(make_doc(source=[]))

    def test_blank_element_name(self):
        doc = make_doc(source=[{"id": "a", "name": "  "}, {"id": "b", "name": "price"}])
        with pytest.raises(ValidationError, match="a"):
            scenario_from_dict(doc)

    def test_bad_band(self):
        with pytest.raises(ParseError, match="band"):
            scenario_from_dict(make_doc(band="extreme"))

    def test_one_to_one_violation(self):
        doc = make_doc(expected=[["a", "x"], ["a", "y"]])
        with pytest.raises(ValidationError, match="a"):
            scenario_from_dict(doc)

    def test_description_is_optional_and_kept(self):
        scenario = scenario_from_dict(make_doc(description="note"))
        assert scenario.description == "note"
        assert scenario_to_dict(scenario)["description"] == "note"

    def test_round_trip(self, tmp_path):
        scenario = scenario_from_dict(make_doc())
        path = tmp_path / "again.json"
        path.write_text(json.dumps(scenario_to_dict(scenario)), encoding="utf-8")
        assert load_scenario(path) == scenario


class TestTypes:
    def test_schema_rejects_mixed_sides(self):
        with pytest.raises(ValidationError):
            Schema(label="m", elements=(
                SchemaElement("a", "x", Side.SOURCE),
                SchemaElement("b", "y", Side.TARGET),
            ))

    def test_mapping_injective_both_ways(self):
        with pytest.raises(ValidationError):
            GroundTruthMapping(pairs=frozenset({("a", "x"), ("b", "x")}))

    def test_scenario_side_check(self):
        source = Schema(label="s", elements=(SchemaElement("a", "n", Side.SOURCE),))
        with pytest.raises(ValidationError):
            Scenario(name="bad", source=source, target=source,
                     expected=GroundTruthMapping(frozenset()), band=HeterogeneityBand.LOW)


class TestFixtures:
    def test_exactly_three_with_expected_sizes_and_bands(self):
        fixtures = builtin_fixtures()
        assert [s.name for s in fixtures] == list(FIXTURE_NAMES)
        stats = {s.name: (len(s.expected), s.band) for s in fixtures}
        assert stats["Person"] == (6, HeterogeneityBand.MEDIUM)
        assert stats["Order"] == (8, HeterogeneityBand.HIGH)
        assert stats["Travel"] == (15, HeterogeneityBand.LOW)

    def test_lookup_case_insensitive(self):
        assert builtin_fixture("PERSON").name == "Person"
        with pytest.raises(KeyError):
            builtin_fixture("nope")

    def test_bands_calibrated(self):
        for scenario in builtin_fixtures():
            index = heterogeneity_index(scenario)
            assert band_for_index(index) is scenario.band, (scenario.name, index)

    def test_fixture_mappings_complete(self):
        for scenario in builtin_fixtures():
            assert len(scenario.expected) == min(len(scenario.source), len(scenario.target))

    def test_fixture_round_trip(self, tmp_path):
        for scenario in builtin_fixtures():
            path = tmp_path / f"{scenario.name}.json"
            path.write_text(json.dumps(scenario_to_dict(scenario)), encoding="utf-8")
            assert load_scenario(path) == scenario


class TestHeterogeneityIndex:
    def test_identical_names(self):
        doc = make_doc(
            source=[{"id": "a", "name": "city"}],
            target=[{"id": "x", "name": "city"}],
            expected=[["a", "x"]],
        )
        assert heterogeneity_index(scenario_from_dict(doc)) == 0.0

    def test_kitten_sitting(self):
        doc = make_doc(
            source=[{"id": "a", "name": "kitten"}],
            target=[{"id": "x", "name": "sitting"}],
            expected=[["a", "x"]],
        )
        assert heterogeneity_index(scenario_from_dict(doc)) == pytest.approx(3 / 7, abs=1e-4)

    def test_band_edges(self):
        assert band_for_index(0.25) is HeterogeneityBand.LOW
        assert band_for_index(0.2501) is HeterogeneityBand.MEDIUM
        assert band_for_index(0.50) is HeterogeneityBand.MEDIUM
        assert band_for_index(0.5001) is HeterogeneityBand.HIGH
