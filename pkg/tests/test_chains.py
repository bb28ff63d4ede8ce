"""Prompt rendering, response parsing (incl. adversarial output), chain runs, cache."""

import json

import pytest

from mechpert.chains import (
    HypothesisChain,
    RegulatorHypothesis,
    parse_causal_response,
    parse_gene_array_response,
    parse_semantic_response,
    run_chains,
)
from mechpert.errors import (
    EmptyPool,
    ProviderTransportError,
    ProviderUnavailable,
    UnparseableResponse,
)
from mechpert.prompts import (
    render_causal_prompt,
    render_design_select_prompt,
    render_semantic_prompt,
    render_target_map_prompt,
)
from mechpert.providers import (
    CacheReplayProvider,
    CachingProvider,
    Provider,
    ProviderRequest,
    cache_key,
    cache_lookup,
    cache_store,
)


class TestPromptRendering:
    def test_semantic_substitution(self):
        text = render_semantic_prompt("GATA1", ["X", "Y"], "K562", k_range="5")
        assert "functional neighbors for the target gene GATA1" in text
        assert "X, Y" in text
        assert "K562" in text
        assert '"kNN"' in text

    def test_semantic_empty_pool(self):
        with pytest.raises(EmptyPool):
            render_semantic_prompt("GATA1", [], "K562")

    def test_semantic_single_candidate(self):
        text = render_semantic_prompt("GATA1", ["ONLY1"], "K562")
        assert "Available Candidates: ONLY1\n" in text

    def test_causal_substitution(self):
        text = render_causal_prompt("TP53", ["A", "B"], "RPE1")
        assert "Map the regulatory hierarchy of TP53 in RPE1" in text

    def test_causal_hierarchical_logic(self):
        text = render_causal_prompt("TP53", ["A"], "RPE1")
        assert "Upstream" in text
        assert "Downstream" in text
        assert "Complexation" in text

    def test_causal_output_schema(self):
        text = render_causal_prompt("TP53", ["A"], "RPE1")
        assert '"regulators"' in text
        assert '"confidence": 0-100' in text

    def test_design_select_batch(self):
        text = render_design_select_prompt("K562", ["A"], ["B", "C"], batch=10)
        assert 'Select the next 10 most informative "Master Regulators"' in text
        assert "already perturbed set: A." in text
        assert "available pool: B, C" in text

    def test_target_map(self):
        text = render_target_map_prompt(["TP53", "MYC"])
        assert "Map the primary downstream targets for the candidates: TP53, MYC." in text
        assert "1.0 (Direct cell-type specific evidence)" in text


class TestParseSemanticResponse:
    POOL = {"A", "B", "C"}

    def test_bare_json(self):
        raw = '{"reasoning": {}, "kNN": ["A", "B"]}'
        assert parse_semantic_response(raw, self.POOL) == ["A", "B"]

    def test_fenced_json(self):
        raw = 'Here is my analysis:\n```json\n{"reasoning": {}, "kNN": ["B", "C"]}\n```\nDone.'
        assert parse_semantic_response(raw, self.POOL) == ["B", "C"]

    def test_out_of_pool_dropped(self):
        raw = '{"kNN": ["A", "ZZZ9", "B"]}'
        assert parse_semantic_response(raw, self.POOL) == ["A", "B"]

    def test_duplicates_first_occurrence(self):
        raw = '{"kNN": ["B", "A", "B", "A"]}'
        assert parse_semantic_response(raw, self.POOL) == ["B", "A"]

    def test_prose_unparseable(self):
        with pytest.raises(UnparseableResponse):
            parse_semantic_response("I think the neighbors are A and B.", self.POOL)

    def test_json_without_knn(self):
        with pytest.raises(UnparseableResponse):
            parse_semantic_response('{"neighbors": ["A"]}', self.POOL)

    def test_adversarial_types(self):
        raw = '{"kNN": [1, null, {"gene": "A"}, "B", ["C"]]}'
        assert parse_semantic_response(raw, self.POOL) == ["B"]

    def test_lowercase_normalized(self):
        raw = '{"kNN": ["a", "b"]}'
        assert parse_semantic_response(raw, self.POOL) == ["A", "B"]


class TestParseCausalResponse:
    POOL = {"A", "B", "C"}

    def test_schema_round_trip(self):
        raw = json.dumps(
            {
                "regulators": [{"gene": "A", "confidence": 80, "type": "TF"}],
                "reasoning": "...",
                "mechanism": "circuit",
            }
        )
        parsed = parse_causal_response(raw, self.POOL)
        assert parsed == [RegulatorHypothesis(gene="A", confidence=0.8, relation="TF")]

    def test_confidence_clamped(self):
        raw = '{"regulators": [{"gene": "A", "confidence": 120, "type": "TF"}]}'
        assert parse_causal_response(raw, self.POOL)[0].confidence == 1.0
        raw = '{"regulators": [{"gene": "A", "confidence": -5, "type": "TF"}]}'
        assert parse_causal_response(raw, self.POOL)[0].confidence == 0.0

    def test_unknown_type_maps_to_partner(self):
        raw = '{"regulators": [{"gene": "B", "confidence": 50, "type": "Cofactor"}]}'
        assert parse_causal_response(raw, self.POOL)[0].relation == "Partner"

    def test_out_of_pool_dropped(self):
        raw = '{"regulators": [{"gene": "ZZZ9", "confidence": 90, "type": "TF"}]}'
        assert parse_causal_response(raw, self.POOL) == []

    def test_duplicate_gene_first_kept(self):
        raw = json.dumps(
            {
                "regulators": [
                    {"gene": "A", "confidence": 90, "type": "TF"},
                    {"gene": "A", "confidence": 10, "type": "Partner"},
                ]
            }
        )
        parsed = parse_causal_response(raw, self.POOL)
        assert len(parsed) == 1
        assert parsed[0].confidence == 0.9

    def test_lossless_for_in_pool(self):
        # parse of a well-formed response preserves (gene, clamped confidence, relation)
        fixtures = [("A", 80, "TF"), ("B", 45, "Target"), ("C", 100, "Partner")]
        raw = json.dumps(
            {"regulators": [{"gene": g, "confidence": c, "type": t} for g, c, t in fixtures]}
        )
        parsed = parse_causal_response(raw, self.POOL)
        assert [(h.gene, h.confidence, h.relation) for h in parsed] == [
            (g, c / 100, t) for g, c, t in fixtures
        ]

    def test_unparseable(self):
        with pytest.raises(UnparseableResponse):
            parse_causal_response("no json here", self.POOL)


class TestParseGeneArray:
    def test_bare_array(self):
        assert parse_gene_array_response('["A", "B"]', {"A", "B", "C"}) == ["A", "B"]

    def test_object_is_unparseable(self):
        with pytest.raises(UnparseableResponse):
            parse_gene_array_response('{"genes": ["A"]}', {"A"})


class _ScriptedProvider(Provider):
    """Returns responses keyed by (prompt kind, chain index); records calls."""

    def __init__(self, semantic=None, causal=None, fail_chains=(), unparseable_chains=()):
        self.semantic = semantic or {}
        self.causal = causal or {}
        self.fail_chains = set(fail_chains)
        self.unparseable_chains = set(unparseable_chains)
        self.calls = []

    def complete(self, request: ProviderRequest) -> str:
        self.calls.append(request)
        if request.chain_index in self.fail_chains:
            raise ProviderTransportError("scripted failure")
        if request.chain_index in self.unparseable_chains:
            return "sorry, no JSON today"
        if "functional neighbors" in request.prompt:
            genes = self.semantic.get(request.chain_index, [])
            return json.dumps({"reasoning": {}, "kNN": genes})
        regulators = self.causal.get(request.chain_index, [])
        return json.dumps(
            {"regulators": regulators, "reasoning": "scripted", "mechanism": ""}
        )


class TestRunChains:
    POOL = ["A", "B", "C", "D"]

    def test_three_chains_ordered(self):
        provider = _ScriptedProvider(
            semantic={0: ["A"], 1: ["B"], 2: ["C"]},
            causal={i: [{"gene": "D", "confidence": 70, "type": "TF"}] for i in range(3)},
        )
        chains = run_chains(provider, "Q", self.POOL, "K562", k_chains=3)
        assert [c.chain_index for c in chains] == [0, 1, 2]
        assert chains[0].semantic == ("A",)
        assert chains[2].semantic == ("C",)
        assert all(c.causal[0].gene == "D" for c in chains)

    def test_unparseable_chain_degrades(self):
        provider = _ScriptedProvider(
            semantic={0: ["A"], 2: ["C"]},
            causal={0: [], 2: []},
            unparseable_chains={1},
        )
        chains = run_chains(provider, "Q", self.POOL, "K562", k_chains=3)
        assert chains[1].is_empty()
        assert chains[0].semantic == ("A",)
        assert chains[2].semantic == ("C",)
        # the degraded chain was retried once per call
        chain1_calls = [c for c in provider.calls if c.chain_index == 1]
        assert len(chain1_calls) == 4  # 2 semantic attempts + 2 causal attempts

    def test_all_transport_failures(self):
        provider = _ScriptedProvider(fail_chains={0, 1, 2})
        with pytest.raises(ProviderUnavailable):
            run_chains(provider, "Q", self.POOL, "K562", k_chains=3)

    def test_partial_transport_failure(self):
        provider = _ScriptedProvider(semantic={0: ["A"]}, causal={0: []}, fail_chains={1})
        chains = run_chains(provider, "Q", self.POOL, "K562", k_chains=2)
        assert not chains[0].is_empty()
        assert chains[1].is_empty()

    def test_k1_single_retrieval(self):
        provider = _ScriptedProvider(semantic={0: ["B", "A"]}, causal={0: []})
        chains = run_chains(provider, "Q", self.POOL, "K562", k_chains=1)
        assert len(chains) == 1
        assert chains[0].semantic == ("B", "A")

    def test_pool_invariants_under_adversarial_output(self):
        class Adversarial(Provider):
            def complete(self, request):
                if "functional neighbors" in request.prompt:
                    return '{"kNN": ["A", "A", "NOT_IN_POOL", 5, "B"]}'
                return json.dumps(
                    {
                        "regulators": [
                            {"gene": "NOPE", "confidence": 90, "type": "TF"},
                            {"gene": "C", "confidence": 900, "type": "???"},
                            {"gene": "C", "confidence": 10, "type": "TF"},
                        ]
                    }
                )

        chains = run_chains(Adversarial(), "Q", self.POOL, "K562", k_chains=2)
        for chain in chains:
            assert len(set(chain.semantic)) == len(chain.semantic)
            assert set(chain.semantic) <= set(self.POOL)
            genes = [h.gene for h in chain.causal]
            assert len(set(genes)) == len(genes)
            assert set(genes) <= set(self.POOL)
            assert all(0.0 <= h.confidence <= 1.0 for h in chain.causal)


class TestCache:
    def test_round_trip(self, tmp_path):
        key = cache_key("m", "prompt text", 0.7, 0)
        cache_store(str(tmp_path), key, "the response", {"model_id": "m"})
        assert cache_lookup(str(tmp_path), key) == "the response"

    def test_unknown_key_miss(self, tmp_path):
        assert cache_lookup(str(tmp_path), "0" * 64) is None

    def test_corrupt_entry_is_miss(self, tmp_path):
        key = cache_key("m", "p", 0.7, 0)
        (tmp_path / f"{key}.json").write_text("{not json", encoding="utf-8")
        assert cache_lookup(str(tmp_path), key) is None

    def test_replay_provider_miss_is_transport_error(self, tmp_path):
        provider = CacheReplayProvider(str(tmp_path))
        with pytest.raises(ProviderTransportError):
            provider.complete(ProviderRequest("p"))

    def test_caching_provider_replay_identical(self, tmp_path):
        inner = _ScriptedProvider(semantic={0: ["A"]}, causal={0: []})
        caching = CachingProvider(inner, str(tmp_path))
        request = ProviderRequest(
            prompt="functional neighbors for the target gene Q.\nAvailable Candidates: A",
        )
        first = caching.complete(request)
        calls_after_first = len(inner.calls)
        second = caching.complete(request)
        assert first == second
        assert len(inner.calls) == calls_after_first  # served from disk
        replay = CacheReplayProvider(str(tmp_path))
        assert replay.complete(request) == first

    def test_key_sensitivity(self):
        base = cache_key("m", "p", 0.7, 0)
        assert cache_key("m", "p", 0.7, 1) != base
        assert cache_key("m", "q", 0.7, 0) != base
        assert cache_key("n", "p", 0.7, 0) != base
        assert cache_key("m", "p", 0.0, 0) != base
