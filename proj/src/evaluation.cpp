#include "pianokit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace pianokit {
namespace {

// Hopcroft-Karp maximum-cardinality matching. adjacency[r] lists the estimate
// indices admissible for reference r. Returns (ref, est) pairs.
class MaxBipartiteMatcher {
public:
    MaxBipartiteMatcher(std::vector<std::vector<int>> adjacency, int num_right)
        : adj_(std::move(adjacency)),
          num_left_(static_cast<int>(adj_.size())),
          match_left_(num_left_, kFree),
          match_right_(num_right, kFree),
          level_(num_left_) {}

    std::vector<std::pair<int, int>> solve() {
        while (bfs()) {
            for (int u = 0; u < num_left_; ++u) {
                if (match_left_[u] == kFree) dfs(u);
            }
        }
        std::vector<std::pair<int, int>> pairs;
        for (int u = 0; u < num_left_; ++u) {
            if (match_left_[u] != kFree) pairs.emplace_back(u, match_left_[u]);
        }
        return pairs;
    }

private:
    static constexpr int kFree = -1;
    static constexpr int kUnreached = -2;

    bool bfs() {
        std::queue<int> queue;
        for (int u = 0; u < num_left_; ++u) {
            if (match_left_[u] == kFree) {
                level_[u] = 0;
                queue.push(u);
            } else {
                level_[u] = kUnreached;
            }
        }
        bool found_augmenting = false;
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop();
            for (int v : adj_[u]) {
                const int next = match_right_[v];
                if (next == kFree) {
                    found_augmenting = true;
                } else if (level_[next] == kUnreached) {
                    level_[next] = level_[u] + 1;
                    queue.push(next);
                }
            }
        }
        return found_augmenting;
    }

    bool dfs(int u) {
        for (int v : adj_[u]) {
            const int next = match_right_[v];
            if (next == kFree || (level_[next] == level_[u] + 1 && dfs(next))) {
                match_left_[u] = v;
                match_right_[v] = u;
                return true;
            }
        }
        level_[u] = kUnreached;
        return false;
    }

    std::vector<std::vector<int>> adj_;
    int num_left_;
    std::vector<int> match_left_;
    std::vector<int> match_right_;
    std::vector<int> level_;
};

EvalResult result_from_matching(std::vector<std::pair<int, int>> pairs, size_t num_ref,
                                size_t num_est) {
    EvalResult result;
    if (num_ref == 0 && num_est == 0) {
        result.precision = result.recall = result.f1 = 1.0; // agree on nothing
        return result;
    }
    std::sort(pairs.begin(), pairs.end());
    const double matches = static_cast<double>(pairs.size());
    result.matched_pairs = std::move(pairs);
    result.precision = num_est > 0 ? matches / num_est : 0.0;
    result.recall = num_ref > 0 ? matches / num_ref : 0.0;
    const double sum = result.precision + result.recall;
    result.f1 = sum > 0.0 ? 2.0 * result.precision * result.recall / sum : 0.0;
    return result;
}

bool offsets_close(double ref_onset, double ref_offset, double est_offset,
                   const MatchConfig& config) {
    const double window = std::max(config.offset_tolerance_seconds,
                                   config.offset_ratio * (ref_offset - ref_onset));
    return std::abs(ref_offset - est_offset) <= window;
}

} // namespace

void MatchConfig::validate() const {
    if (!(onset_tolerance_seconds > 0.0)) {
        throw std::invalid_argument("onset tolerance must be positive");
    }
    if (use_offset && !(offset_tolerance_seconds > 0.0)) {
        throw std::invalid_argument("offset tolerance must be positive");
    }
    if (use_offset && offset_ratio < 0.0) {
        throw std::invalid_argument("offset ratio must be non-negative");
    }
    if (use_velocity && !(velocity_tolerance > 0.0)) {
        throw std::invalid_argument("velocity tolerance must be positive");
    }
}

EvalResult match_notes(const std::vector<NoteEvent>& ref, const std::vector<NoteEvent>& est,
                       const MatchConfig& config) {
    config.validate();
    std::vector<std::vector<int>> admissible(ref.size());
    for (size_t r = 0; r < ref.size(); ++r) {
        for (size_t e = 0; e < est.size(); ++e) {
            if (ref[r].pitch != est[e].pitch) continue;
            if (std::abs(ref[r].onset_seconds - est[e].onset_seconds) >
                config.onset_tolerance_seconds) {
                continue;
            }
            if (config.use_offset &&
                !offsets_close(ref[r].onset_seconds, ref[r].offset_seconds,
                               est[e].offset_seconds, config)) {
                continue;
            }
            admissible[r].push_back(static_cast<int>(e));
        }
    }

    if (config.use_velocity) {
        // One global scale minimizing sum (v_ref - s * v_est)^2 over the
        // time-admissible pairs, then the tolerance test in [0, 1] units.
        double dot = 0.0;
        double norm = 0.0;
        for (size_t r = 0; r < ref.size(); ++r) {
            for (int e : admissible[r]) {
                dot += static_cast<double>(ref[r].velocity) * est[e].velocity;
                norm += static_cast<double>(est[e].velocity) * est[e].velocity;
            }
        }
        const double scale = norm > 0.0 ? dot / norm : 1.0;
        for (size_t r = 0; r < ref.size(); ++r) {
            std::erase_if(admissible[r], [&](int e) {
                return std::abs(ref[r].velocity - scale * est[e].velocity) / 127.0 >
                       config.velocity_tolerance;
            });
        }
    }

    MaxBipartiteMatcher matcher(std::move(admissible), static_cast<int>(est.size()));
    return result_from_matching(matcher.solve(), ref.size(), est.size());
}

EvalResult match_pedals(const std::vector<PedalEvent>& ref, const std::vector<PedalEvent>& est,
                        const MatchConfig& config) {
    config.validate();
    std::vector<std::vector<int>> admissible(ref.size());
    for (size_t r = 0; r < ref.size(); ++r) {
        for (size_t e = 0; e < est.size(); ++e) {
            if (std::abs(ref[r].onset_seconds - est[e].onset_seconds) >
                config.onset_tolerance_seconds) {
                continue;
            }
            if (config.use_offset &&
                !offsets_close(ref[r].onset_seconds, ref[r].offset_seconds,
                               est[e].offset_seconds, config)) {
                continue;
            }
            admissible[r].push_back(static_cast<int>(e));
        }
    }
    MaxBipartiteMatcher matcher(std::move(admissible), static_cast<int>(est.size()));
    return result_from_matching(matcher.solve(), ref.size(), est.size());
}

EvalResult frame_metrics(const RegressionGrid& ref_roll, const RegressionGrid& est_roll) {
    if (ref_roll.grid() != est_roll.grid()) {
        throw std::invalid_argument("frame metrics need identically shaped rolls");
    }
    size_t true_positive = 0;
    size_t ref_positive = 0;
    size_t est_positive = 0;
    const std::vector<double>& ref_values = ref_roll.values();
    const std::vector<double>& est_values = est_roll.values();
    for (size_t i = 0; i < ref_values.size(); ++i) {
        const bool r = ref_values[i] > 0.5;
        const bool e = est_values[i] > 0.5;
        ref_positive += r;
        est_positive += e;
        true_positive += r && e;
    }
    EvalResult result;
    if (ref_positive == 0 && est_positive == 0) {
        result.precision = result.recall = result.f1 = 1.0;
        return result;
    }
    result.precision = est_positive > 0 ? static_cast<double>(true_positive) / est_positive : 0.0;
    result.recall = ref_positive > 0 ? static_cast<double>(true_positive) / ref_positive : 0.0;
    const double sum = result.precision + result.recall;
    result.f1 = sum > 0.0 ? 2.0 * result.precision * result.recall / sum : 0.0;
    return result;
}

std::vector<std::pair<double, EvalResult>> tolerance_sweep(const std::vector<NoteEvent>& ref,
                                                           const std::vector<NoteEvent>& est,
                                                           const std::vector<double>& tolerances,
                                                           SweepMode mode) {
    if (!std::is_sorted(tolerances.begin(), tolerances.end())) {
        throw std::invalid_argument("sweep tolerances must be sorted ascending");
    }
    std::vector<std::pair<double, EvalResult>> results;
    results.reserve(tolerances.size());
    for (double tolerance : tolerances) {
        if (!(tolerance > 0.0)) {
            throw std::invalid_argument("sweep tolerances must be positive");
        }
        MatchConfig config;
        if (mode == SweepMode::Onset) {
            config.onset_tolerance_seconds = tolerance;
        } else {
            config.use_offset = true;
            config.offset_tolerance_seconds = tolerance;
        }
        results.emplace_back(tolerance, match_notes(ref, est, config));
    }
    return results;
}

} // namespace pianokit
