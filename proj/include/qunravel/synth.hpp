#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qunravel/channels.hpp"
#include "qunravel/rng.hpp"

namespace qunravel {

enum class Family { isometric_chain, memoryless, total_order_chain, entangling_c2 };

struct SynthSpec {
    int n = 3;
    int d = 2;
    int d_mem = 2;
    int d_env = 1;
    double chi_min_target = 0.1;
    std::uint64_t seed = 0;
    Family family = Family::isometric_chain;
};

// A generated comb with its ground truth.
struct SynthResult {
    Comb comb;
    // Composed and canonicalized process.
    ProcessMatrix process;
    Unravelling truth;
    // Smallest nonzero chi_1 among the probed values.
    double chi_min_achieved = 0.0;
    int kraus_rank = 0;
    int attempts = 0;
};

struct ShuffleResult {
    ProcessMatrix process;
    // New position k holds old wire perm[k].
    std::vector<int> input_perm;
    std::vector<int> output_perm;
    // Old label to new label.
    std::map<std::string, std::string> names;
};

// Raised when rejection sampling exhausts its budget.
struct GenerationError : Error {
    using Error::Error;
};

inline constexpr int kMaxRejections = 200;
// chi_1 values at or below this are treated as exact independence.
inline constexpr double kZeroChi = 1e-8;

Matrix haar_unitary(int d, Rng& rng);
// First d_in columns of a Haar unitary on d_out dimensions.
Matrix haar_isometry(int d_out, int d_in, Rng& rng);
// Kraus operators of a random channel with the given Kraus rank.
std::vector<Matrix> random_kraus(int d_out, int d_in, int rank, Rng& rng);
// Random density matrix of rank `rank` (induced measure).
Matrix random_state(int d, int rank, Rng& rng);

SynthResult random_comb(const SynthSpec& spec, Rng& rng);
SynthResult total_order_chain(int n, int d, Rng& rng, double chi_min_target);
// A 2-in/2-out entangling tooth followed by a 1-in/1-out tooth.
SynthResult entangling_c2(const SynthSpec& spec, Rng& rng);

struct MemorylessOptions {
    int kraus_rank = 1;
    // Teeth (by input index) replaced by constant channels.
    std::vector<int> constant_teeth;
};

SynthResult random_memoryless(int n, int d, Rng& rng, const MemorylessOptions& options = {});
// Dispatches on spec.family.
SynthResult generate(const SynthSpec& spec, Rng& rng);

ShuffleResult shuffle_wires(const ProcessMatrix& p, Rng& rng);
Unravelling relabel(const Unravelling& u, const std::map<std::string, std::string>& names);

// chi_1 values probed by the c = 1 last-tooth scan along `truth`, plus every
// single input-output pair of the full process.
std::vector<double> probed_chi_values(const ProcessMatrix& p, const Unravelling& truth);

}  // namespace qunravel
