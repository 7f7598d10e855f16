from __future__ import annotations

import pytest

from liveinfer.clock import RealClock, VirtualClock
from liveinfer.streams import LiveInputStream, SimulatedInputStream


class TestSimulated:
    def test_four_char_schedule_at_240_cpm(self):
        clock = VirtualClock()
        stream = SimulatedInputStream("abcd", 240, clock)
        assert stream.poll() == ("", False)
        expected = [(0.25, "a"), (0.5, "ab"), (0.75, "abc")]
        for t, visible in expected:
            while clock.now() < t:
                clock.sleep(0.05)
            assert stream.poll() == (visible, False)
        clock.sleep(0.25)
        assert stream.poll() == ("abcd", True)
        assert stream.t_end == pytest.approx(1.0)

    def test_single_char_at_60_cpm(self):
        clock = VirtualClock()
        stream = SimulatedInputStream("x", 60, clock)
        assert stream.t_end == pytest.approx(1.0)

    def test_input_duration_closed_form(self):
        stream = SimulatedInputStream("q" * 480, 240, VirtualClock())
        assert stream.input_s == pytest.approx(120.0)

    def test_rejects_non_positive_speed(self):
        with pytest.raises(ValueError):
            SimulatedInputStream("ab", 0, VirtualClock())

    def test_polls_monotone(self):
        clock = VirtualClock()
        stream = SimulatedInputStream("hello world", 6000, clock)
        seen = ""
        for _ in range(200):
            text, _ = stream.poll()
            assert text.startswith(seen)
            seen = text
            clock.sleep(0.001)
        assert seen == "hello world"

    def test_schedule_deterministic(self):
        def trace():
            clock = VirtualClock()
            stream = SimulatedInputStream("abc def", 240, clock)
            out = []
            for _ in range(100):
                out.append((round(clock.now(), 6), stream.poll()))
                clock.sleep(0.03)
            return out

        assert trace() == trace()

    def test_real_clock_release_near_schedule(self):
        clock = RealClock()
        stream = SimulatedInputStream("ab", 6000, clock)  # 10 ms per char
        clock.sleep(0.05)
        text, end = stream.poll()
        assert (text, end) == ("ab", True)


class TestLive:
    def test_append_and_backspace(self):
        stream = LiveInputStream(VirtualClock())
        stream.append("ab")
        stream.backspace(1)
        assert stream.poll() == ("a", False)

    def test_backspace_clamps(self):
        stream = LiveInputStream(VirtualClock())
        stream.append("ab")
        stream.backspace(5)
        assert stream.poll() == ("", False)

    def test_finish_then_edit_rejected(self):
        stream = LiveInputStream(VirtualClock())
        stream.append("x")
        stream.finish()
        with pytest.raises(RuntimeError):
            stream.append("y")
        with pytest.raises(RuntimeError):
            stream.finish()

    def test_finish_stamps_end(self):
        clock = VirtualClock()
        stream = LiveInputStream(clock)
        clock.sleep(2.5)
        stream.append("hi")
        clock.sleep(0.5)
        stream.finish()
        assert stream.poll() == ("hi", True)
        assert stream.t_end == pytest.approx(3.0)
        assert stream.input_s == pytest.approx(3.0)

    def test_input_duration_undefined_before_finish(self):
        stream = LiveInputStream(VirtualClock())
        with pytest.raises(RuntimeError):
            _ = stream.input_s

    def test_abort_flag(self):
        stream = LiveInputStream(VirtualClock())
        stream.abort()
        assert stream.aborted
