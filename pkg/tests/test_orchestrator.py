from __future__ import annotations

import pytest

from liveinfer.clock import VirtualClock
from liveinfer.formatting import PromptFormat, Stage
from liveinfer.memory import InferenceMemory
from liveinfer.models import (
    ActionKind,
    LatencyModel,
    MockModelClient,
    ModelRegistry,
    ModelSpec,
)
from liveinfer.orchestrator import (
    BASELINE_SYSTEM_MESSAGE,
    SessionConfig,
    SessionStepError,
    run_baseline,
    run_session,
)
from liveinfer.segmenter import Granularity
from liveinfer.streams import LiveInputStream, SimulatedInputStream, StreamAborted

INFER_SPEC = ModelSpec(id="infer-mock", backend="mock")
ANSWER_SPEC = ModelSpec(id="answer-mock", backend="mock")

THREE_SENTENCES = "First fact here. Second fact now. What is it?"

FAST = LatencyModel(fixed_overhead_s=0.1)


def make_config(**overrides) -> SessionConfig:
    defaults = dict(
        granularity=Granularity.SENTENCE,
        format=PromptFormat.UA_SPI,
        inference_model=INFER_SPEC,
        output_model=ANSWER_SPEC,
        poll_interval_s=0.05,
    )
    defaults.update(overrides)
    return SessionConfig(**defaults)


def make_registry(
    inference_script: list[str],
    output_script: list[str],
    clock: VirtualClock,
    inference_latency: LatencyModel = FAST,
    output_latency: LatencyModel = FAST,
) -> ModelRegistry:
    registry = ModelRegistry()
    registry.add(MockModelClient(INFER_SPEC, inference_script, inference_latency, clock))
    registry.add(MockModelClient(ANSWER_SPEC, output_script, output_latency, clock))
    return registry


class TestRunSessionTraces:
    def test_single_segment_question_goes_straight_to_output(self):
        clock = VirtualClock()
        registry = make_registry([], ["Hello to you."], clock)
        stream = SimulatedInputStream("Hi.", 240, clock)
        memory = InferenceMemory()
        result = run_session(stream, make_config(), registry, clock, memory=memory)
        assert [s.stage for s in result.steps] == [Stage.OUTPUT]
        assert result.steps[0].new_segment_texts == ["Hi."]
        assert result.response == "Hello to you."
        assert len(memory) == 0

    def test_three_sentence_trace(self):
        clock = VirtualClock()
        registry = make_registry(["I1", "I2"], ["The answer is (B)"], clock)
        stream = SimulatedInputStream(THREE_SENTENCES, 240, clock)
        memory = InferenceMemory()
        result = run_session(stream, make_config(), registry, clock, memory=memory)

        assert [(s.stage, s.action.kind) for s in result.steps] == [
            (Stage.INFERENCE, ActionKind.INFERENCE),
            (Stage.INFERENCE, ActionKind.INFERENCE),
            (Stage.OUTPUT, ActionKind.FINAL),
        ]
        assert result.steps[0].completion.text == "I1"
        assert result.steps[0].new_segment_texts == ["First fact here."]
        assert result.steps[1].completion.text == "I2"
        assert result.steps[1].new_segment_texts == [" Second fact now."]
        assert result.steps[2].new_segment_texts == [" What is it?"]
        assert "(B)" in result.response
        assert len(memory) == 2
        assert [e.inference for e in memory.entries] == ["I1", "I2"]

    def test_wait_then_accumulated_inference(self):
        clock = VirtualClock()
        registry = make_registry(["wait", "I1"], ["Done."], clock)
        stream = SimulatedInputStream(THREE_SENTENCES, 240, clock)
        memory = InferenceMemory()
        result = run_session(stream, make_config(), registry, clock, memory=memory)

        assert [s.action.kind for s in result.steps] == [
            ActionKind.WAIT,
            ActionKind.INFERENCE,
            ActionKind.FINAL,
        ]
        assert result.steps[0].new_segment_texts == ["First fact here."]
        # the wait wrote nothing, so both stable segments arrive together
        assert result.steps[1].new_segment_texts == ["First fact here.", " Second fact now."]
        assert len(memory) == 1
        assert memory.entries[0].inference == "I1"
        assert [s.text for s in memory.entries[0].segments] == [
            "First fact here.",
            " Second fact now.",
        ]


class TestRunSessionTiming:
    def test_latency_measured_from_end_of_text(self):
        clock = VirtualClock()
        registry = make_registry(["I1", "I2"], ["Final."], clock)
        stream = SimulatedInputStream(THREE_SENTENCES, 240, clock)
        cfg = make_config()
        result = run_session(stream, cfg, registry, clock)
        final = result.steps[-1]
        # last inference ended well before end-of-text, so only poll slack
        # separates end-of-text from the output call
        assert result.latency_s <= final.completion.busy_s + cfg.poll_interval_s + 1e-9
        assert result.latency_s >= final.completion.busy_s

    def test_in_flight_inference_completes_before_output(self):
        clock = VirtualClock()
        slow = LatencyModel(fixed_overhead_s=5.0)
        registry = make_registry(["I1", "I2"], ["Final."], clock, inference_latency=slow)
        stream = SimulatedInputStream(THREE_SENTENCES, 240, clock)
        memory = InferenceMemory()
        result = run_session(stream, make_config(), registry, clock, memory=memory)
        # second call runs 8.5s..13.5s across end-of-text at 11.25s; its
        # result is kept and the output stage starts only after it finished
        assert len(memory) == 2
        second, final = result.steps[1], result.steps[2]
        assert second.completion.t_end > stream.t_end
        assert final.completion.t_start >= second.completion.t_end
        assert result.latency_s == pytest.approx(
            final.completion.t_end - stream.t_end
        )

    def test_single_in_flight_no_overlap(self):
        clock = VirtualClock()
        registry = make_registry(["I1", "I2"], ["Final."], clock)
        stream = SimulatedInputStream(THREE_SENTENCES, 240, clock)
        result = run_session(stream, make_config(), registry, clock)
        spans = [(s.completion.t_start, s.completion.t_end) for s in result.steps]
        for (_, end), (start, _) in zip(spans, spans[1:]):
            assert start >= end

    def test_compute_is_sum_of_busy(self):
        clock = VirtualClock()
        registry = make_registry(["I1", "I2"], ["Final."], clock)
        stream = SimulatedInputStream(THREE_SENTENCES, 240, clock)
        result = run_session(stream, make_config(), registry, clock)
        assert result.compute_s == pytest.approx(
            sum(s.completion.busy_s for s in result.steps)
        )
        assert result.input_s == pytest.approx(len(THREE_SENTENCES) * 0.25)

    def test_compute_attributed_per_model(self):
        clock = VirtualClock()
        registry = make_registry(
            ["I1", "I2"],
            ["Final."],
            clock,
            inference_latency=LatencyModel(fixed_overhead_s=0.4),
            output_latency=LatencyModel(fixed_overhead_s=1.5),
        )
        stream = SimulatedInputStream(THREE_SENTENCES, 240, clock)
        result = run_session(stream, make_config(), registry, clock)
        split = result.compute_by_model()
        assert split["infer-mock"] == pytest.approx(0.8)
        assert split["answer-mock"] == pytest.approx(1.5)


class TestRunSessionErrors:
    def test_model_error_annotated_with_step(self):
        clock = VirtualClock()
        registry = make_registry(["I1"], ["Final."], clock)  # second inference missing
        stream = SimulatedInputStream(THREE_SENTENCES, 240, clock)
        with pytest.raises(SessionStepError) as err:
            run_session(stream, make_config(), registry, clock)
        assert err.value.step_index == 1
        assert err.value.stage is Stage.INFERENCE

    def test_aborted_stream_cancels_session(self):
        clock = VirtualClock()
        registry = make_registry([], ["Final."], clock)
        stream = LiveInputStream(clock)
        stream.append("Hello")
        stream.abort()
        with pytest.raises(StreamAborted):
            run_session(stream, make_config(), registry, clock)


class TestRunBaseline:
    def test_worked_latency_example(self):
        # 480-char question and 480-char answer with the A1 latency model;
        # the system message adds ceil(71/4) prompt tokens on top of 120
        clock = VirtualClock()
        lm = LatencyModel(0.001, 0.05, 0.05)
        question = "q" * 479 + "."
        registry = make_registry([], ["a" * 480], clock, output_latency=lm)
        stream = SimulatedInputStream(question, 240, clock)
        result = run_baseline(stream, make_config(), registry, clock)
        prompt_chars = len(BASELINE_SYSTEM_MESSAGE) + 480
        expected = 0.05 + 0.001 * -(-prompt_chars // 4) + 0.05 * 120
        assert result.latency_s == pytest.approx(expected)
        assert abs(result.latency_s - 6.17) / 6.17 < 0.02
        assert result.compute_s == pytest.approx(result.latency_s)
        assert len(result.steps) == 1

    def test_zero_latency_mock(self):
        clock = VirtualClock()
        registry = make_registry([], ["ans"], clock, output_latency=LatencyModel())
        stream = SimulatedInputStream("Hello there.", 240, clock)
        result = run_baseline(stream, make_config(), registry, clock)
        assert result.latency_s == 0.0
        assert result.compute_s == 0.0

    def test_full_input_matches_session_final_prompt(self):
        text = THREE_SENTENCES

        clock_a = VirtualClock()
        registry_a = make_registry([], ["x"], clock_a)
        baseline = run_baseline(
            SimulatedInputStream(text, 240, clock_a), make_config(), registry_a, clock_a
        )
        assert baseline.steps[0].prompt[1].content == text

        clock_b = VirtualClock()
        registry_b = make_registry(["I1", "I2"], ["x"], clock_b)
        session = run_session(
            SimulatedInputStream(text, 240, clock_b),
            make_config(format=PromptFormat.U_PI),
            registry_b,
            clock_b,
        )
        final_user = session.steps[-1].prompt[1].content
        assert final_user.count(text) == 1

    def test_task_hint_appended_to_baseline_system(self):
        clock = VirtualClock()
        registry = make_registry([], ["x"], clock)
        stream = SimulatedInputStream("Hi.", 240, clock)
        result = run_baseline(
            stream, make_config(task_hint="Answer with a letter."), registry, clock
        )
        assert result.steps[0].prompt[0].content == (
            BASELINE_SYSTEM_MESSAGE + "\n\nAnswer with a letter."
        )


class TestBaselineEquivalence:
    def test_one_sentence_input_reduces_to_single_output_step(self):
        clock = VirtualClock()
        registry = make_registry([], ["Answer."], clock)
        stream = SimulatedInputStream("No segment ever stabilizes here", 240, clock)
        result = run_session(stream, make_config(), registry, clock)
        assert [s.stage for s in result.steps] == [Stage.OUTPUT]


def test_session_result_serialization_roundtrip():
    clock = VirtualClock()
    registry = make_registry(["I1", "I2"], ["Final."], clock)
    stream = SimulatedInputStream(THREE_SENTENCES, 240, clock)
    result = run_session(stream, make_config(), registry, clock)
    payload = result.to_dict()
    assert payload["response"] == "Final."
    assert len(payload["steps"]) == 3
    assert payload["steps"][0]["action"]["kind"] == "inference"
    assert payload["steps"][0]["prompt"][0]["role"] == "system"
    summary = result.summary()
    assert [s["kind"] for s in summary["steps"]] == ["inference", "inference", "final"]
