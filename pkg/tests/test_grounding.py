import unittest
from pathlib import Path
from unittest.mock import Mock
import sys

import numpy as np
import requests

# Ensure the project root is on sys.path so 'app' package is importable
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from app.env import load_layout, load_layout_file
from app.exceptions import EmbeddingProviderError, GroundingError
from app.grounding.cleaner import clean_output, clean_output_with_stats
from app.grounding.embeddings import DeterministicEmbeddingProvider, HttpEmbeddingProvider, cosine
from app.grounding.grounder import ground_script, ground_step
from app.grounding.index import IndexKind, build_index, nearest, nearest_vector
from app.grounding.prompts import render_label_prompt, render_repair_prompt
from app.grounding.repair import HttpRepairProvider, NullRepairProvider, RepairRequest
from app.grounding.vocabulary import action_tokens, build_indexes, load_vocabulary, room_partition
from app.schemas.grounding import GroundedStep, Flagged, GroundingThresholds
from app.schemas.script import ActionVerb
from app.script.parser import render_script
from tests.helpers import APPENDIX_BREAKFAST, DATA_DIR, HOMES_DIR, two_room_document

BRUSHING_TEETH = """\
7:20 - 7:22, bathroom
Step 1: [walk] <bathroom> 
(7:20 - 7:20)
Step 2: [switchon] <lightswitch> 
(7:20 - 7:20)
Step 3: [walk] <bathroomcounter> 
(7:20 - 7:21)
Step 4: [grab] <toothbrush> 
(7:21 - 7:21)
Step 5: [lookat] <toothpaste> 
(7:21 - 7:22)

7:22 - 7:26, bathroom
Step 1: [grab] <toothpaste> 
(7:22 - 7:22)
Step 2: [put] <toothpaste> <toothbrush> 
(7:22 - 7:23)
Step 3: [drink] <waterglass> 
(7:23 - 7:25)
Step 4: [put] <waterglass> 
<bathroomcounter> (7:25 -7:25)
Step 5: [switchoff] <lightswitch> 
(7:26 - 7:26)
"""

BRUSHING_TEETH_CLEAN = [
    "[walk] <bathroom> (07:20 - 07:20) (bathroom)",
    "[switchon] <lightswitch> (07:20 - 07:20) (bathroom)",
    "[walk] <bathroomcounter> (07:20 - 07:21) (bathroom)",
    "[grab] <toothbrush> (07:21 - 07:21) (bathroom)",
    "[lookat] <toothpaste> (07:21 - 07:22) (bathroom)",
    "[grab] <toothpaste> (07:22 - 07:22) (bathroom)",
    "[put] <toothpaste> <toothbrush> (07:22 - 07:23) (bathroom)",
    "[drink] <waterglass> (07:23 - 07:25) (bathroom)",
    "[put] <waterglass> <bathroomcounter> (07:25 - 07:25) (bathroom)",
    "[switchoff] <lightswitch> (07:26 - 07:26) (bathroom)",
]


class FixedProvider:
    """Hand-picked vectors for exact index checks"""

    def __init__(self, vectors):
        self.vectors = {k: np.asarray(v, dtype=np.float64) for k, v in vectors.items()}

    def embed(self, text):
        if text not in self.vectors:
            raise KeyError(text)
        return self.vectors[text]

    def dimension(self):
        return len(next(iter(self.vectors.values())))


class TestCleaner(unittest.TestCase):
    """Free-form generator output reduced to command lines"""

    def test_brushing_teeth_breakdown(self):
        lines, dropped = clean_output_with_stats(BRUSHING_TEETH)
        self.assertEqual(lines, BRUSHING_TEETH_CLEAN)
        self.assertEqual(dropped, 0)

    def test_prefixes_and_explicit_rooms(self):
        raw = (
            "Monday\n"
            "brushing_teeth (07:20 - 07:26):\n"
            "1. [walk] <kitchen> (8:00 - 8:01) (kitchen)\n"
            "- [open] <fridge> (8:01 - 8:02)\n"
            "Here is your routine!\n"
        )
        lines, dropped = clean_output_with_stats(raw, room="kitchen")
        self.assertEqual(
            lines,
            ["[walk] <kitchen> (08:00 - 08:01) (kitchen)", "[open] <fridge> (08:01 - 08:02) (kitchen)"],
        )
        self.assertEqual(dropped, 1)

    def test_line_without_room_context_is_dropped(self):
        self.assertEqual(clean_output("[walk] <kitchen> (8:00 - 8:01)\n"), [])

    def test_clean_text_passes_through(self):
        lines = clean_output("\n".join(BRUSHING_TEETH_CLEAN))
        self.assertEqual(lines, BRUSHING_TEETH_CLEAN)


class TestEmbeddings(unittest.TestCase):
    """Cosine similarity and the in-process provider"""

    def test_cosine_oracle(self):
        self.assertAlmostEqual(cosine(np.array([1, 2, 3]), np.array([4, 5, 6])), 0.974631846, places=8)
        self.assertAlmostEqual(cosine(np.array([1, 0]), np.array([0, 1])), 0.0)
        self.assertAlmostEqual(cosine(np.array([1, 0]), np.array([-2, 0])), -1.0)

    def test_cosine_rejects_bad_input(self):
        with self.assertRaises(GroundingError):
            cosine(np.zeros(3), np.ones(3))
        with self.assertRaises(GroundingError):
            cosine(np.ones(2), np.ones(3))

    def test_deterministic_vectors(self):
        a = DeterministicEmbeddingProvider(dimension=64)
        b = DeterministicEmbeddingProvider(dimension=64)
        np.testing.assert_array_equal(a.embed("fridge"), b.embed("Fridge "))
        self.assertAlmostEqual(float(np.linalg.norm(a.embed("fridge"))), 1.0)
        self.assertEqual(a.dimension(), 64)

    def test_synonym_cosines(self):
        provider = DeterministicEmbeddingProvider(
            synonyms={"refrigerator": "fridge", "wallk": {"target": "walk", "cosine": 0.75}}
        )
        self.assertAlmostEqual(cosine(provider.embed("refrigerator"), provider.embed("fridge")), 0.9, places=9)
        self.assertAlmostEqual(cosine(provider.embed("wallk"), provider.embed("walk")), 0.75, places=9)

    def test_synonym_cycle_and_bad_cosine(self):
        with self.assertRaises(GroundingError):
            DeterministicEmbeddingProvider(synonyms={"a": {"target": "b", "cosine": 1.5}})
        provider = DeterministicEmbeddingProvider(synonyms={"a": "b", "b": "a"})
        with self.assertRaises(GroundingError):
            provider.embed("a")

    def test_empty_token(self):
        with self.assertRaises(EmbeddingProviderError):
            DeterministicEmbeddingProvider().embed("  ")

    def test_http_provider_batches_and_caches(self):
        session = Mock()
        session.post.return_value.json.return_value = {"embeddings": [[1.0, 0.0], [0.0, 2.0]]}
        provider = HttpEmbeddingProvider(endpoint="http://embed.local", api_key="k", session=session)
        vectors = provider.embed_many(["fridge", "sofa"])
        np.testing.assert_array_equal(vectors[1], np.array([0.0, 2.0]))
        np.testing.assert_array_equal(provider.embed("fridge"), np.array([1.0, 0.0]))
        self.assertEqual(session.post.call_count, 1)
        self.assertEqual(provider.dimension(), 2)
        headers = session.post.call_args.kwargs["headers"]
        self.assertEqual(headers["Authorization"], "Bearer k")

    def test_http_provider_failure(self):
        session = Mock()
        session.post.side_effect = requests.exceptions.ConnectionError("down")
        provider = HttpEmbeddingProvider(endpoint="http://embed.local", session=session)
        with self.assertRaises(EmbeddingProviderError):
            provider.embed("fridge")


class TestVocabularyIndex(unittest.TestCase):
    """Exhaustive nearest-neighbour search over unit vectors"""

    def test_nearest_matches_brute_force(self):
        provider = DeterministicEmbeddingProvider(dimension=32)
        tokens = [f"token{i}" for i in range(40)]
        index = build_index(tokens, IndexKind.ACTION, provider)
        rng = np.random.default_rng(3)
        for _ in range(25):
            query = rng.standard_normal(32)
            token, score = nearest_vector(index, query)
            scores = [cosine(provider.embed(t), query) for t in tokens]
            best = int(np.argmax(scores))
            self.assertEqual(token, tokens[best])
            self.assertAlmostEqual(score, scores[best], places=9)

    def test_ties_resolve_to_smallest_token(self):
        provider = FixedProvider({"b": [1, 0], "a": [2, 0], "c": [0, 1]})
        index = build_index(["b", "a", "c"], IndexKind.ACTION, provider)
        self.assertEqual(nearest_vector(index, np.array([1.0, 0.0])), ("a", 1.0))

    def test_room_partition_restricts_candidates(self):
        provider = FixedProvider({"fridge": [1, 0, 0], "bed": [0.9, 0.1, 0], "tv": [0, 0, 1]})
        index = build_index(
            ["fridge", "bed", "tv"], IndexKind.OBJECT, provider, {"kitchen": ["fridge"], "bedroom": ["bed", "tv"]}
        )
        self.assertEqual(nearest(index, "fridge", "kitchen")[0], "fridge")
        self.assertEqual(nearest(index, "fridge", "bedroom")[0], "bed")
        self.assertEqual(nearest(index, "fridge")[0], "fridge")
        with self.assertRaises(GroundingError):
            nearest(index, "fridge", "garage")

    def test_build_rejects_duplicates_and_empty(self):
        provider = DeterministicEmbeddingProvider()
        with self.assertRaises(GroundingError):
            build_index(["walk", "walk"], IndexKind.ACTION, provider)
        with self.assertRaises(GroundingError):
            build_index([], IndexKind.ACTION, provider)

    def test_provider_failure_is_wrapped(self):
        provider = FixedProvider({"walk": [1, 0]})
        with self.assertRaises(EmbeddingProviderError):
            build_index(["walk", "run"], IndexKind.ACTION, provider)

    def test_vocabulary_file_feeds_partition(self):
        layout = load_layout_file(HOMES_DIR / "home_a.json")
        vocabulary = load_vocabulary(DATA_DIR / "vocabulary.json")
        partition = room_partition(layout, vocabulary)
        self.assertIn("microwave", partition["kitchen"])
        self.assertIn("fridge", partition["kitchen"])
        self.assertIn("bathroom", partition["kitchen"])
        self.assertNotIn("fridge", partition["bathroom"])
        self.assertEqual(len(action_tokens(vocabulary)), 16)

    def test_unknown_vocabulary_verbs_skipped(self):
        vocabulary = load_vocabulary(DATA_DIR / "vocabulary.json").model_copy(update={"actions": ["walk", "fly"]})
        self.assertEqual(action_tokens(vocabulary), ["walk"])


class TestGrounder(unittest.TestCase):
    """Per-line grounding with thresholds and bounded repair"""

    def setUp(self):
        self.layout = load_layout(two_room_document())
        self.provider = DeterministicEmbeddingProvider(
            synonyms={
                "wallk": {"target": "walk", "cosine": 0.75},
                "friedge": {"target": "fridge", "cosine": 0.65},
                "refrigerator": "fridge",
            }
        )
        self.indexes = build_indexes(self.layout, None, self.provider)
        self.thresholds = GroundingThresholds()
        self.rooms = set(self.layout.room_names)

    def ground(self, line):
        return ground_step(line, self.indexes.actions, self.indexes.objects, self.thresholds, self.rooms)

    def test_exact_line_accepted(self):
        result = self.ground("[open] <fridge> (07:00 - 07:01) (kitchen)")
        self.assertIsInstance(result, GroundedStep)
        self.assertEqual(result.step.verb, ActionVerb.OPEN)
        self.assertEqual(result.step.objects, ("fridge",))
        self.assertAlmostEqual(result.substitutions[1].score, 1.0)

    def test_action_below_threshold_flagged(self):
        result = self.ground("[wallk] <fridge> (07:00 - 07:01) (kitchen)")
        self.assertIsInstance(result, Flagged)
        self.assertEqual(result.reason, "action below threshold")
        self.assertEqual(result.best_token, "walk")
        self.assertAlmostEqual(result.score, 0.75, places=6)

    def test_object_above_threshold_accepted(self):
        result = self.ground("[walk] <friedge> (07:00 - 07:01) (kitchen)")
        self.assertIsInstance(result, GroundedStep)
        self.assertEqual(result.step.objects, ("fridge",))
        self.assertAlmostEqual(result.substitutions[1].score, 0.65, places=6)

    def test_synonym_grounds_to_layout_class(self):
        result = self.ground("[open] <refrigerator> (07:00 - 07:01) (kitchen)")
        self.assertEqual(result.step.objects, ("fridge",))

    def test_unknown_room_flagged(self):
        result = self.ground("[walk] <fridge> (07:00 - 07:01) (livingroom)")
        self.assertIsInstance(result, Flagged)
        self.assertEqual(result.reason, "unknown room")

    def test_unparseable_and_bad_time(self):
        self.assertEqual(self.ground("walk to the fridge").reason, "unparseable line")
        self.assertTrue(self.ground("[walk] <fridge> (7am - 8am) (kitchen)").reason.startswith("malformed time"))

    def test_null_repair_discards(self):
        raw = (
            "[walk] <kitchen> (11:59 - 12:00) (kitchen)\n"
            "[dance] <radio> (12:00 - 12:05) (kitchen)\n"
        )
        script, report = ground_script(raw, self.layout, self.indexes, repair=NullRepairProvider())
        self.assertEqual(len(script.steps), 1)
        self.assertEqual(report.accepted, 1)
        self.assertEqual(report.discarded, 1)
        self.assertEqual(report.lines[1].result.attempts, 0)

    def test_repair_succeeds_on_second_attempt(self):
        repair = Mock()
        repair.repair.side_effect = [
            "[dance] <radio> (12:00 - 12:05) (kitchen)",
            "[grab] <mug> (12:00 - 12:05) (kitchen)",
        ]
        raw = (
            "[walk] <kitchen> (11:59 - 12:00) (kitchen)\n"
            "[dance] <radio> (12:00 - 12:05) (kitchen)\n"
        )
        script, report = ground_script(raw, self.layout, self.indexes, repair=repair)
        self.assertEqual(len(script.steps), 2)
        self.assertEqual(script.steps[1].verb, ActionVerb.GRAB)
        outcome = report.lines[1].result
        self.assertEqual(outcome.outcome, "repaired")
        self.assertEqual(outcome.attempts, 2)
        requests_sent = [c.args[0] for c in repair.repair.call_args_list]
        self.assertEqual([r.attempt for r in requests_sent], [1, 2])
        self.assertEqual(requests_sent[0].room, "kitchen")
        self.assertIn("mug", requests_sent[0].objects)
        self.assertEqual(requests_sent[0].context, ["[walk] <kitchen> (11:59 - 12:00) (kitchen)"])

    def test_repair_gives_up_after_max_retries(self):
        repair = Mock()
        repair.repair.return_value = "[dance] <radio> (12:00 - 12:05) (kitchen)"
        raw = "[dance] <radio> (12:00 - 12:05) (kitchen)\n"
        script, report = ground_script(
            raw, self.layout, self.indexes, GroundingThresholds(max_retries=3), repair=repair
        )
        self.assertEqual(script.steps, [])
        self.assertEqual(report.lines[0].result.outcome, "discarded")
        self.assertEqual(report.lines[0].result.attempts, 3)
        self.assertEqual(repair.repair.call_count, 3)

    def test_out_of_order_grounded_line_discarded(self):
        raw = (
            "[walk] <kitchen> (12:00 - 12:01) (kitchen)\n"
            "[open] <fridge> (11:00 - 11:01) (kitchen)\n"
        )
        script, report = ground_script(raw, self.layout, self.indexes)
        self.assertEqual(len(script.steps), 1)
        self.assertEqual(report.lines[1].result.outcome, "discarded")

    def test_grounding_a_grounded_script_is_identity(self):
        layout = load_layout_file(HOMES_DIR / "home_a.json")
        indexes = build_indexes(layout, None, DeterministicEmbeddingProvider())
        script, report = ground_script(APPENDIX_BREAKFAST, layout, indexes)
        self.assertEqual(report.discarded, 0)

        again, second = ground_script(render_script(script), layout, indexes)
        self.assertEqual(again.steps, script.steps)
        self.assertEqual(second.accepted, len(script.steps))
        for line in second.lines:
            for substitution in line.result.substitutions:
                self.assertEqual(substitution.raw, substitution.grounded)
                self.assertAlmostEqual(substitution.score, 1.0, places=9)

    def test_raising_thresholds_never_accepts_more(self):
        layout = load_layout_file(HOMES_DIR / "home_a.json")
        provider = DeterministicEmbeddingProvider(
            synonyms={
                "wallk": {"target": "walk", "cosine": 0.75},
                "grabb": {"target": "grab", "cosine": 0.55},
                "toastr": {"target": "toaster", "cosine": 0.7},
                "glass": {"target": "waterglass", "cosine": 0.62},
            }
        )
        indexes = build_indexes(layout, None, provider)
        rooms = set(layout.room_names)
        lines = APPENDIX_BREAKFAST.splitlines()
        lines += [
            line.replace("[walk]", "[wallk]").replace("[grab]", "[grabb]")
            .replace("<toaster>", "<toastr>").replace("<waterglass>", "<glass>")
            for line in lines
        ]

        def accepted(tau_act, tau_obj):
            thresholds = GroundingThresholds(tau_act=tau_act, tau_obj=tau_obj)
            return {
                i for i, line in enumerate(lines)
                if isinstance(ground_step(line, indexes.actions, indexes.objects, thresholds, rooms), GroundedStep)
            }

        taus = [0.0, 0.5, 0.6, 0.65, 0.7, 0.8, 0.9, 0.95]
        for sweep in (
            [accepted(t, t) for t in taus],
            [accepted(t, 0.6) for t in taus],
            [accepted(0.8, t) for t in taus],
        ):
            for looser, stricter in zip(sweep, sweep[1:]):
                self.assertTrue(stricter <= looser)
        self.assertLess(len(accepted(0.95, 0.95)), len(accepted(0.0, 0.0)))


class TestRepairAndPrompts(unittest.TestCase):
    """Remote repair and label prompts"""

    def test_repair_prompt_lists_vocabulary(self):
        prompt = render_repair_prompt(
            "[dance] <radio> (12:00 - 12:05) (kitchen)", "action below threshold",
            ["[walk] <kitchen> (11:59 - 12:00) (kitchen)"], "kitchen", ["walk", "grab"], ["mug", "fridge"],
        )
        self.assertIn("[dance] <radio>", prompt)
        self.assertIn("Actions: walk, grab", prompt)
        self.assertIn("Objects available in kitchen: mug, fridge", prompt)
        self.assertIn("Surrounding commands:", prompt)

    def test_label_prompt_mentions_bed_to_toilet(self):
        prompt = render_label_prompt("night walk", "[walk] <toilet>", ["Sleep", "Bed_to_Toilet"])
        self.assertIn("Label Set: Sleep, Bed_to_Toilet", prompt)
        self.assertIn("walking from the bed to the bathroom", prompt)

    def test_http_repair_returns_line(self):
        session = Mock()
        session.post.return_value.json.return_value = {"line": " [grab] <mug> (12:00 - 12:05) (kitchen) "}
        provider = HttpRepairProvider(endpoint="http://repair.local", session=session)
        candidate = provider.repair(RepairRequest(line="[dance] <radio>", reason="bad"))
        self.assertEqual(candidate, "[grab] <mug> (12:00 - 12:05) (kitchen)")
        self.assertIn("prompt", session.post.call_args.kwargs["json"])

    def test_http_repair_failure_means_no_repair(self):
        session = Mock()
        session.post.side_effect = requests.exceptions.Timeout("slow")
        provider = HttpRepairProvider(endpoint="http://repair.local", session=session)
        self.assertIsNone(provider.repair(RepairRequest(line="x", reason="bad")))

    def test_http_repair_requires_endpoint(self):
        with self.assertRaises(GroundingError):
            HttpRepairProvider(endpoint="")


if __name__ == "__main__":
    unittest.main()
