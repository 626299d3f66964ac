#include "lvr/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "lvr/errors.hpp"

namespace lvr::nn {

template <typename T>
GradCheckReport gradient_check(const std::function<Tensor<T>(Tape<T>&)>& loss, std::vector<Tensor<T>> inputs,
                               const GradCheckOptions& options) {
    if (!(options.eps > 0.0))
        throw ConfigError("gradient_check: eps must be positive");
    if (inputs.empty())
        throw ConfigError("gradient_check: no inputs");

    for (auto& in : inputs) {
        in.set_requires_grad(true);
        in.zero_grad();
    }
    {
        Tape<T> tape(true);
        Tensor<T> l = loss(tape);
        tape.backward(l);
    }

    std::vector<std::pair<std::size_t, std::size_t>> entries;
    for (std::size_t t = 0; t < inputs.size(); ++t)
        for (std::size_t i = 0; i < inputs[t].size(); ++i)
            entries.emplace_back(t, i);
    if (options.max_checks != 0 && entries.size() > options.max_checks) {
        std::mt19937_64 rng(options.seed);
        std::shuffle(entries.begin(), entries.end(), rng);
        entries.resize(options.max_checks);
        std::sort(entries.begin(), entries.end());
    }

    auto evaluate = [&]() {
        Tape<T> tape(false);
        return static_cast<double>(loss(tape).item());
    };

    GradCheckReport report;
    const T step = static_cast<T>(options.eps);
    for (auto [t, i] : entries) {
        T& v = inputs[t].data()[i];
        const T saved = v;
        v = saved + step;
        const double up = evaluate();
        v = saved - step;
        const double down = evaluate();
        v = saved;
        // Actual step after rounding to T, so float checks are not biased.
        const double h = static_cast<double>(saved + step) - static_cast<double>(saved - step);
        const double numeric = (up - down) / h;
        const double analytic = static_cast<double>(inputs[t].grad()[i]);
        const double abs_err = std::abs(analytic - numeric);
        const double rel_err =
            abs_err / std::max({std::abs(analytic), std::abs(numeric), options.denom_floor});
        report.max_abs_error = std::max(report.max_abs_error, abs_err);
        if (rel_err > report.max_rel_error || report.checked == 0) {
            report.max_rel_error = std::max(report.max_rel_error, rel_err);
            std::ostringstream os;
            os << "input " << t << "[" << i << "]: analytic " << analytic << " vs numeric " << numeric;
            report.worst = os.str();
        }
        ++report.checked;
    }
    report.passed = report.max_rel_error <= options.tol;
    return report;
}

template GradCheckReport gradient_check(const std::function<Tensor<float>(Tape<float>&)>&, std::vector<Tensor<float>>,
                                        const GradCheckOptions&);
template GradCheckReport gradient_check(const std::function<Tensor<double>(Tape<double>&)>&,
                                        std::vector<Tensor<double>>, const GradCheckOptions&);

} // namespace lvr::nn
