import pytest
from hypothesis import given
from hypothesis import strategies as st

from weblearn.embeddings import EmbeddingTable
from weblearn.errors import DataError
from weblearn.textmatch import (
    bag_from_tokens,
    fuse_modalities,
    match_score_exact,
    match_score_embedding,
    match_score_lt_we,
    tokenize,
)


class TestTokenize:
    def test_lowercases_and_splits(self):
        assert tokenize("Walking with My DOG!") == ["walking", "with", "my", "dog"]

    def test_empty(self):
        assert tokenize("") == []

    def test_mixed_separators_and_digits(self):
        assert tokenize("dog-walk 101") == ["dog", "walk", "101"]

    @given(st.text())
    def test_tokens_always_lower_alnum(self, text):
        for tok in tokenize(text):
            assert tok and tok == tok.lower() and tok.isalnum()


class TestExactMatch:
    def test_multiplicity_normalized_by_bag_size(self):
        bag = bag_from_tokens(["dog", "dog", "park"])
        assert match_score_exact(bag, ["dog"]) == pytest.approx(2 / 3)

    def test_no_overlap(self):
        assert match_score_exact(bag_from_tokens(["cat"]), ["dog"]) == 0.0

    def test_empty_bag(self):
        assert match_score_exact({}, ["dog"]) == 0.0

    def test_stemmed_sides_both_reduced(self):
        bag = bag_from_tokens(["walking"])
        assert match_score_exact(bag, ["walks"], stemmed=True) == 1.0

    def test_empty_concept_rejected(self):
        with pytest.raises(DataError):
            match_score_exact({"dog": 1}, [])

    @given(
        st.lists(st.sampled_from(["dog", "dogs", "walk", "walking", "cat", "tree"]), max_size=20),
        st.lists(st.sampled_from(["dog", "walk", "cat"]), min_size=1, max_size=3),
    )
    def test_stem_match_count_at_least_exact(self, tokens, concept):
        # any exact hit is also a stemmed hit (stemming is deterministic
        # and applied to both sides), so the stemmed score dominates
        bag = bag_from_tokens(tokens)
        assert match_score_exact(bag, concept, stemmed=True) >= match_score_exact(
            bag, concept, stemmed=False
        ) - 1e-12


@pytest.fixture
def toy_table():
    # unit-normalized by construction below; cosines are exactly the dot
    # products of these directions
    return EmbeddingTable.from_pairs(
        {
            "dog": [1.0, 0.0, 0.0],
            "puppy": [0.8, 0.6, 0.0],
            "walk": [0.0, 1.0, 0.0],
            "turbine": [0.1, 0.0, 0.994987437106],
        }
    )


class TestEmbeddingMatch:
    def test_identical_tokens_score_one(self, toy_table):
        assert match_score_embedding({"dog": 1}, ["dog"], toy_table, 0.6) == pytest.approx(1.0)

    def test_threshold_passes_related_word(self, toy_table):
        # cos(puppy, dog) = 0.8 >= 0.6
        assert match_score_embedding({"puppy": 1}, ["dog"], toy_table, 0.6) == pytest.approx(0.8)

    def test_threshold_blocks_unrelated_word(self, toy_table):
        # cos(turbine, dog) = 0.1 < 0.6
        assert match_score_embedding({"turbine": 1}, ["dog"], toy_table, 0.6) == 0.0

    def test_missing_token_contributes_zero_but_counts(self, toy_table):
        score = match_score_embedding({"dog": 1, "zzz": 1}, ["dog"], toy_table, 0.6)
        assert score == pytest.approx(0.5)

    def test_stem_fallback_for_inflected_token(self, toy_table):
        # "walking" is not in the table; its stem "walk" is
        assert match_score_embedding({"walking": 1}, ["walk"], toy_table, 0.6) == pytest.approx(1.0)

    def test_threshold_one_equals_exact_on_covered_vocab(self, toy_table):
        bag = bag_from_tokens(["dog", "walk", "puppy"])
        exact = match_score_exact(bag, ["dog"])
        assert match_score_embedding(bag, ["dog"], toy_table, 1.0) == pytest.approx(exact)


class TestLtWeMatch:
    def test_full_mass_on_matching_word(self, toy_table):
        assert match_score_lt_we({"dog": 1}, [("dog", 1.0)], toy_table, 0.6, 5) == pytest.approx(1.0)

    def test_empty_bag(self, toy_table):
        assert match_score_lt_we({}, [("dog", 1.0)], toy_table, 0.6, 5) == 0.0

    def test_hand_computed_mixture(self, toy_table):
        # topic {dog: 0.6, walk: 0.4}; bag {walking} matches via stem:
        # cos(walk, dog) = 0 -> below threshold -> 0; cos(walk, walk) = 1
        # score = 0.6 * 0 + 0.4 * 1.0
        topic = [("dog", 0.6), ("walk", 0.4)]
        score = match_score_lt_we({"walking": 1}, topic, toy_table, 0.6, 5)
        assert score == pytest.approx(0.4)

    def test_top_n_renormalizes(self, toy_table):
        topic = [("dog", 0.5), ("walk", 0.3), ("turbine", 0.2)]
        # top_n=1 keeps only "dog" with renormalized mass 1.0
        score = match_score_lt_we({"dog": 1}, topic, toy_table, 0.6, 1)
        assert score == pytest.approx(1.0)

    def test_invalid_top_n(self, toy_table):
        with pytest.raises(DataError):
            match_score_lt_we({"dog": 1}, [("dog", 1.0)], toy_table, 0.6, 0)


class TestFusion:
    def test_reference_weights(self):
        scores = {"text": 0.5, "asr": 0.2, "image": 0.4, "ocr": 1.0}
        weights = {"text": 1.0, "asr": 0.5, "image": 0.5, "ocr": 0.05}
        assert fuse_modalities(scores, weights) == pytest.approx(0.85)

    def test_all_zero(self):
        weights = {"text": 1.0, "asr": 0.5, "image": 0.5, "ocr": 0.05}
        assert fuse_modalities({"text": 0, "asr": 0, "image": 0, "ocr": 0}, weights) == 0.0

    def test_single_modality_identity(self):
        assert fuse_modalities({"text": 0.37}, {"text": 1.0, "asr": 0.0}) == pytest.approx(0.37)

    def test_negative_weight_rejected(self):
        with pytest.raises(DataError):
            fuse_modalities({"text": 1.0}, {"text": -0.1})

    @given(st.floats(0, 5), st.floats(0, 5), st.floats(0.01, 2))
    def test_linear_in_each_modality(self, s_text, delta, w):
        weights = {"text": w, "asr": 0.5}
        base = fuse_modalities({"text": s_text, "asr": 1.0}, weights)
        bumped = fuse_modalities({"text": s_text + delta, "asr": 1.0}, weights)
        assert bumped - base == pytest.approx(w * delta, abs=1e-9)
