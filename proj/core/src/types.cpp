#include "abach/types.hpp"

#include <algorithm>
#include <sstream>

namespace abach {

VolCurve::VolCurve(std::vector<double> times, std::vector<double> sigmas)
    : t_(std::move(times)), s_(std::move(sigmas)) {
    if (t_.empty() || t_.size() != s_.size())
        throw InvalidInput("VolCurve needs matching, non-empty knot vectors");
    for (size_t i = 0; i < t_.size(); ++i) {
        if (!(t_[i] > 0.0)) throw InvalidInput("VolCurve knot times must be positive");
        if (i > 0 && !(t_[i] > t_[i - 1]))
            throw InvalidInput("VolCurve knot times must be strictly increasing");
        if (!(s_[i] > 0.0)) throw InvalidInput("VolCurve sigmas must be positive");
    }
    v_.resize(t_.size());
    for (size_t i = 0; i < t_.size(); ++i) {
        v_[i] = s_[i] * s_[i] * t_[i];
        if (i > 0 && v_[i] < v_[i - 1]) {
            std::ostringstream os;
            os << "total variance must be non-decreasing: sigma^2 t drops from " << v_[i - 1]
               << " at t=" << t_[i - 1] << " to " << v_[i] << " at t=" << t_[i];
            throw InvalidInput(os.str());
        }
    }
}

double VolCurve::variance(double t) const {
    if (!(t >= 0.0)) throw InvalidInput("VolCurve::variance requires t >= 0");
    if (t == 0.0) return 0.0;
    if (t <= t_.front()) return v_.front() * t / t_.front();
    if (t >= t_.back()) return s_.back() * s_.back() * t;  // flat sigma beyond last knot
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const size_t i = static_cast<size_t>(it - t_.begin());
    const double w = (t - t_[i - 1]) / (t_[i] - t_[i - 1]);
    return v_[i - 1] + w * (v_[i] - v_[i - 1]);
}

double VolCurve::sigma(double t) const {
    if (t <= 0.0) return s_.front();  // continuous limit from above
    return std::sqrt(variance(t) / t);
}

ModelParams::ModelParams(VolCurve sigma_, double eta_, double k_, Alpha alpha_)
    : sigma(std::move(sigma_)), eta(eta_), k(k_), alpha(alpha_) {
    if (!(k > 0.0))
        throw InvalidInput("k must be strictly positive; use ModelParams::bachelier for the "
                           "Gaussian limit");
    if (!std::isfinite(eta)) throw InvalidInput("eta must be finite");
}

ModelParams ModelParams::bachelier(VolCurve sigma_) {
    ModelParams p(std::move(sigma_), 0.0, 1.0, Alpha(0.5));
    p.bachelier_limit = true;
    return p;
}

}  // namespace abach
