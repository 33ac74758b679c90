import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ionsampler.dd_compiler import (
    EvolutionSegment,
    PhaseEvent,
    PulseSchedule,
    compile_beam_splitter,
    compile_elements,
    compile_unitary,
    hadamard_slice_patterns,
    nn_isolation_pattern,
    simulate_schedule,
)
from ionsampler.ion_chain import TrapParams, build_chain, coupling_matrix
from ionsampler.linear_optics import (
    BSElement,
    ElementSequence,
    PhaseElement,
    beam_splitter_unitary,
    fourier_unitary,
    unitary_distance,
)


def chain_coupling(num_ions: int):
    trap = TrapParams(2 * np.pi * 10e6, 2 * np.pi * 0.3e6, num_ions)
    return coupling_matrix(build_chain(trap))


class TestSignPatterns:
    def test_nn_two_modes_trivial(self):
        assert nn_isolation_pattern(2, 1).signs == (1, 1)

    def test_nn_four_modes_middle_pair(self):
        assert nn_isolation_pattern(4, 2).signs == (-1, 1, 1, -1)

    def test_nn_five_modes_first_pair(self):
        assert nn_isolation_pattern(5, 1).signs == (1, 1, -1, 1, -1)

    @given(dim=st.integers(2, 12), offset=st.integers(0, 11))
    @settings(max_examples=40)
    def test_nn_parity_condition(self, dim, offset):
        pair = 1 + offset % (dim - 1)
        s = nn_isolation_pattern(dim, pair).signs
        for i in range(dim - 1):
            expected = 1 if i + 1 == pair else -1
            assert s[i] * s[i + 1] == expected

    def test_hadamard_two_modes_single_slice(self):
        patterns = hadamard_slice_patterns(2, 1)
        assert [p.signs for p in patterns] == [(1, 1)]

    def test_hadamard_three_modes(self):
        patterns = hadamard_slice_patterns(3, 1)
        assert [p.signs for p in patterns] == [(1, 1, 1), (1, 1, -1)]

    def test_hadamard_slice_count_is_power_of_two(self):
        for dim, expected in [(2, 1), (3, 2), (4, 4), (5, 4), (6, 8), (9, 8)]:
            assert len(hadamard_slice_patterns(dim, 1)) == expected

    @given(dim=st.integers(2, 10), offset=st.integers(0, 9))
    @settings(max_examples=50)
    def test_hadamard_pair_averages(self, dim, offset):
        pair = 1 + offset % (dim - 1)
        patterns = hadamard_slice_patterns(dim, pair)
        for i in range(dim):
            for k in range(i + 1, dim):
                total = sum(p.signs[i] * p.signs[k] for p in patterns)
                if (i + 1, k + 1) == (pair, pair + 1):
                    assert total == len(patterns)
                else:
                    assert total == 0  # exact integer cancellation

    def test_bad_pair_rejected(self):
        with pytest.raises(ValueError):
            nn_isolation_pattern(3, 3)
        with pytest.raises(ValueError):
            hadamard_slice_patterns(3, 0)


class TestEchoPrimitive:
    @given(rate=st.floats(1e3, 1e6), total=st.floats(1e-6, 1e-2))
    @settings(max_examples=40)
    def test_pair_echo_cancels_evolution(self, rate, total):
        # evolve T/2, flip one mode, evolve T/2, flip back: the sign
        # conjugation negates the off-diagonal coupling exactly.
        k = np.array([[0.0, rate], [rate, 0.0]])
        half = total / 2
        schedule = PulseSchedule(
            2,
            (
                EvolutionSegment(half),
                PhaseEvent(half, 1, np.pi),
                EvolutionSegment(half),
                PhaseEvent(total, 1, np.pi),
            ),
        )
        u = simulate_schedule(k, schedule)
        assert unitary_distance(u, np.eye(2)) < 1e-12


class TestCompileBeamSplitter:
    def test_zero_angle_empty_schedule(self):
        schedule = compile_beam_splitter(chain_coupling(3), 1, 0.0)
        assert schedule.steps == ()
        assert schedule.total_duration == 0.0

    def test_two_modes_single_segment(self):
        k = chain_coupling(2)
        schedule = compile_beam_splitter(k, 1, np.pi / 4)
        assert schedule.num_events == 0
        segments = [s for s in schedule.steps if isinstance(s, EvolutionSegment)]
        assert len(segments) == 1
        assert schedule.total_duration == pytest.approx(
            (np.pi / 4) / k.rates[0, 1], rel=1e-12
        )
        u = simulate_schedule(k, schedule)
        assert unitary_distance(u, beam_splitter_unitary(1, np.pi / 4, 2)) < 1e-10

    def test_duration_accounting(self):
        k = chain_coupling(5)
        theta = 1.1
        schedule = compile_beam_splitter(k, 3, theta, n_sub=8)
        assert schedule.total_duration == pytest.approx(theta / k.rates[2, 3], rel=1e-12)

    def test_pi_events_pair_up_per_mode(self):
        schedule = compile_beam_splitter(chain_coupling(5), 2, 0.9, n_sub=4)
        counts = {}
        for step in schedule.steps:
            if isinstance(step, PhaseEvent):
                assert step.phi == pytest.approx(np.pi)
                counts[step.mode_index] = counts.get(step.mode_index, 0) + 1
        assert counts, "a five-mode compile should need decoupling flips"
        for mode, n in counts.items():
            assert n % 2 == 0, f"mode {mode} ends outside its nominal frame"

    def test_error_shrinks_with_subdivision(self):
        k = chain_coupling(4)
        target = beam_splitter_unitary(2, np.pi / 4, 4)
        dist = {
            n: unitary_distance(
                simulate_schedule(k, compile_beam_splitter(k, 2, np.pi / 4, n_sub=n)),
                target,
            )
            for n in (4, 16)
        }
        assert dist[16] < dist[4]

    def test_nn_scheme_cancels_neighbour_leakage(self):
        k = chain_coupling(3)
        target = beam_splitter_unitary(1, np.pi / 3, 3)
        compiled = simulate_schedule(
            k, compile_beam_splitter(k, 1, np.pi / 3, n_sub=32, scheme="nn")
        )
        plain = simulate_schedule(
            k,
            PulseSchedule(3, (EvolutionSegment((np.pi / 3) / k.rates[0, 1]),)),
        )
        assert unitary_distance(compiled, target) < unitary_distance(plain, target)

    def test_angle_out_of_range(self):
        with pytest.raises(ValueError):
            compile_beam_splitter(chain_coupling(3), 1, 2.0)

    def test_weak_coupling_duration_guard(self):
        with pytest.raises(ValueError, match="duration"):
            compile_beam_splitter(chain_coupling(3), 1, np.pi / 4, max_duration=1e-9)

    def test_unknown_scheme_rejected(self):
        with pytest.raises(ValueError):
            compile_beam_splitter(chain_coupling(3), 1, 0.5, scheme="zigzag")


class TestCompileUnitary:
    def test_identity_target_zero_duration(self):
        schedule = compile_unitary(chain_coupling(3), np.eye(3))
        assert schedule.total_duration == 0.0

    def test_balanced_splitter_with_phases(self):
        k = chain_coupling(2)
        target = (
            np.diag([np.exp(0.3j), np.exp(-0.1j)]) @ beam_splitter_unitary(1, np.pi / 4, 2)
        )
        schedule = compile_unitary(k, target)
        assert unitary_distance(simulate_schedule(k, schedule), target) < 1e-9

    def test_fourier_error_monotone_in_subdivision(self):
        k = chain_coupling(4)
        target = fourier_unitary(4)
        distances = [
            unitary_distance(
                simulate_schedule(k, compile_unitary(k, target, n_sub=n)), target
            )
            for n in (4, 16, 64)
        ]
        assert distances[0] > distances[1] > distances[2]

    def test_element_dim_mismatch(self):
        seq = ElementSequence(3, (BSElement(1, 0.3),))
        with pytest.raises(ValueError):
            compile_elements(chain_coupling(4), seq)

    def test_phase_elements_become_events(self):
        k = chain_coupling(2)
        seq = ElementSequence(2, (PhaseElement(2, 1.0), BSElement(1, 0.5)))
        schedule = compile_elements(k, seq)
        events = [s for s in schedule.steps if isinstance(s, PhaseEvent)]
        assert events[0].mode_index == 2
        assert events[0].phi == pytest.approx(1.0)
        assert events[0].time == 0.0


class TestSimulateSchedule:
    def test_empty_schedule_is_identity(self):
        u = simulate_schedule(np.zeros((3, 3)), PulseSchedule(3))
        np.testing.assert_allclose(u, np.eye(3), atol=1e-15)

    def test_single_phase_event(self):
        schedule = PulseSchedule(3, (PhaseEvent(0.0, 2, np.pi),))
        u = simulate_schedule(np.zeros((3, 3)), schedule)
        np.testing.assert_allclose(u, np.diag([1, -1, 1]), atol=1e-12)

    def test_dim_mismatch_rejected(self):
        with pytest.raises(ValueError):
            simulate_schedule(np.zeros((2, 2)), PulseSchedule(3))


class TestScheduleSerialization:
    def test_round_trip(self):
        schedule = compile_beam_splitter(chain_coupling(4), 2, 1.0, n_sub=2)
        back = PulseSchedule.from_json(json.loads(json.dumps(schedule.to_json())))
        assert back == schedule

    def test_negative_duration_rejected(self):
        with pytest.raises(ValueError):
            EvolutionSegment(-1.0)

    def test_event_beyond_elapsed_rejected(self):
        with pytest.raises(ValueError):
            PulseSchedule(2, (EvolutionSegment(1.0), PhaseEvent(5.0, 1, 0.1)))

    def test_inconsistent_declared_total_rejected(self):
        data = PulseSchedule(2, (EvolutionSegment(1.0),)).to_json()
        data["total_s"] = 2.0
        with pytest.raises(ValueError):
            PulseSchedule.from_json(data)
