#pragma once

// Small named processes shared by the test binaries.

#include "oracles.hpp"
#include "qunravel/channels.hpp"

namespace fixtures {

using namespace qunravel;

inline Wires ins(int n, int d = 2) { return make_wires("A", n, d, Direction::input); }
inline Wires outs(int n, int d = 2) { return make_wires("B", n, d, Direction::output); }

inline ProcessMatrix unitary_process(const Matrix& u, int n) { return choi_from_kraus({u}, ins(n), outs(n)); }

inline ProcessMatrix identity_channel() { return unitary_process(Matrix::Identity(2, 2), 1); }
// Identity on A1 -> B1 and on A2 -> B2.
inline ProcessMatrix identity_pair() { return unitary_process(Matrix::Identity(4, 4), 2); }
inline ProcessMatrix cnot_process() { return unitary_process(oracle::cnot(), 2); }

// Two-tooth comb: tooth 1 stores A1 in memory and emits |0> on B1; tooth 2
// releases the memory on B2 and discards A2 into a 2-dim environment.
inline Comb swap_across_teeth() {
    Tooth first;
    first.in_wires = {{"A1", 2, Direction::input}};
    first.out_wires = {{"B1", 2, Direction::output}};
    first.mem_in = 1;
    first.mem_out = 2;
    Matrix store = Matrix::Zero(4, 2);
    store(0, 0) = 1.0;  // |a> -> |0>_B1 |a>_M
    store(1, 1) = 1.0;
    first.kraus = {store};
    Tooth second;
    second.in_wires = {{"A2", 2, Direction::input}};
    second.out_wires = {{"B2", 2, Direction::output}};
    second.mem_in = 2;
    second.mem_out = 2;
    // SWAP on (A2, M) -> (B2, E): B2 receives the memory, E receives A2.
    Matrix swap = Matrix::Zero(4, 4);
    for (int a = 0; a < 2; ++a)
        for (int m = 0; m < 2; ++m) swap(m * 2 + a, a * 2 + m) = 1.0;
    second.kraus = {swap};
    return Comb{{first, second}};
}

inline Unravelling order(std::initializer_list<std::pair<Labels, Labels>> steps) {
    Unravelling u;
    for (const auto& [p, q] : steps) u.steps.push_back({p, q});
    return u;
}

}  // namespace fixtures
