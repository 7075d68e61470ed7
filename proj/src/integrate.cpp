#include "epend/integrate.hpp"

#include <limits>
#include <string>

#include "epend/error.hpp"

namespace epend {

namespace {

[[noreturn]] void blow_up(double t)
{
    throw Error(ErrorKind::blow_up, "blow-up at t=" + std::to_string(t), t);
}

inline void check_state(double theta, double v, double t)
{
    if (!(std::abs(v) <= blow_up_velocity) || !std::isfinite(theta)) blow_up(t);
}

struct Coeffs {
    double vertical, horizontal;
};

inline Coeffs forcing_at(const PendulumParams& p, double t)
{
    const double phase = p.omega * t;
    return {1.0 + p.p * std::cos(phase), p.e * p.p * std::cos(phase - p.alpha)};
}

inline double accel(double gamma, const Coeffs& c, double theta, double v)
{
    return -gamma * v - c.vertical * std::sin(theta) - c.horizontal * std::cos(theta);
}

// One classical RK4 step of the 2-dim system.
inline void rk4_step(double gamma, const Coeffs& c0, const Coeffs& c1, const Coeffs& c2, double h, double& theta,
                     double& v)
{
    const double k1t = v;
    const double k1v = accel(gamma, c0, theta, v);
    const double k2t = v + 0.5 * h * k1v;
    const double k2v = accel(gamma, c1, theta + 0.5 * h * k1t, k2t);
    const double k3t = v + 0.5 * h * k2v;
    const double k3v = accel(gamma, c1, theta + 0.5 * h * k2t, k3t);
    const double k4t = v + h * k3v;
    const double k4v = accel(gamma, c2, theta + h * k3t, k4t);
    theta += h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

// Augmented state: (θ, v) plus the fundamental matrix Φ (row-major).
struct Augmented {
    double theta, v;
    Mat2 phi;
};

inline void augmented_rhs(double gamma, const Coeffs& c, const Augmented& y, Augmented& dy)
{
    const double s = std::sin(y.theta);
    const double co = std::cos(y.theta);
    dy.theta = y.v;
    dy.v = -gamma * y.v - c.vertical * s - c.horizontal * co;
    const double j21 = -c.vertical * co + c.horizontal * s;
    // dΦ/dt = J Φ with J = [[0, 1], [j21, −γ]].
    dy.phi.a[0] = y.phi.a[2];
    dy.phi.a[1] = y.phi.a[3];
    dy.phi.a[2] = j21 * y.phi.a[0] - gamma * y.phi.a[2];
    dy.phi.a[3] = j21 * y.phi.a[1] - gamma * y.phi.a[3];
}

inline Augmented axpy(const Augmented& y, double h, const Augmented& k)
{
    Augmented out;
    out.theta = y.theta + h * k.theta;
    out.v = y.v + h * k.v;
    for (int i = 0; i < 4; ++i) out.phi.a[i] = y.phi.a[i] + h * k.phi.a[i];
    return out;
}

inline void rk4_step(double gamma, const Coeffs& c0, const Coeffs& c1, const Coeffs& c2, double h, Augmented& y)
{
    Augmented k1, k2, k3, k4;
    augmented_rhs(gamma, c0, y, k1);
    augmented_rhs(gamma, c1, axpy(y, 0.5 * h, k1), k2);
    augmented_rhs(gamma, c1, axpy(y, 0.5 * h, k2), k3);
    augmented_rhs(gamma, c2, axpy(y, h, k3), k4);
    const double w = h / 6.0;
    y.theta += w * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta);
    y.v += w * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    for (int i = 0; i < 4; ++i) y.phi.a[i] += w * (k1.phi.a[i] + 2.0 * k2.phi.a[i] + 2.0 * k3.phi.a[i] + k4.phi.a[i]);
}

void require_state(const State& s)
{
    if (!s.finite()) throw Error(ErrorKind::invalid_state, "invalid state");
}

}  // namespace

void validate(const IntegratorSettings& settings)
{
    if (settings.steps_per_period < min_steps_per_period)
        throw Error(ErrorKind::invalid_argument,
                    "steps_per_period must be at least " + std::to_string(min_steps_per_period));
}

StroboscopicMap::StroboscopicMap(const PendulumParams& params, const IntegratorSettings& settings, double section_time)
    : params_(validated(params)), steps_(settings.steps_per_period), period_(params_.period())
{
    validate(settings);
    if (!std::isfinite(section_time)) throw Error(ErrorKind::invalid_argument, "section time must be finite");
    h_ = period_ / steps_;
    const int nodes = 2 * steps_;
    vertical_.resize(nodes);
    horizontal_.resize(nodes);
    for (int j = 0; j < nodes; ++j) {
        const Coeffs c = forcing_at(params_, section_time + j * (0.5 * h_));
        vertical_[j] = c.vertical;
        horizontal_[j] = c.horizontal;
    }
}

State StroboscopicMap::advance(const State& s, int k) const
{
    require_state(s);
    if (k < 0) throw Error(ErrorKind::invalid_argument, "period count must be non-negative");
    double theta = s.theta, v = s.v;
    const int nodes = 2 * steps_;
    for (int period = 0; period < k; ++period) {
        for (int i = 0; i < steps_; ++i) {
            const int j = 2 * i;
            const int j2 = j + 2 == nodes ? 0 : j + 2;
            rk4_step(params_.gamma, {vertical_[j], horizontal_[j]}, {vertical_[j + 1], horizontal_[j + 1]},
                     {vertical_[j2], horizontal_[j2]}, h_, theta, v);
            if (!(std::abs(v) <= blow_up_velocity)) blow_up(s.t + period * period_ + (i + 1) * h_);
        }
        check_state(theta, v, s.t + (period + 1) * period_);
    }
    return {theta, v, s.t + k * period_};
}

StrobeResult StroboscopicMap::advance_with_jacobian(const State& s, int k) const
{
    require_state(s);
    if (k < 1) throw Error(ErrorKind::invalid_argument, "period count must be at least 1");
    Augmented y{s.theta, s.v, Mat2::identity()};
    const int nodes = 2 * steps_;
    for (int period = 0; period < k; ++period) {
        for (int i = 0; i < steps_; ++i) {
            const int j = 2 * i;
            const int j2 = j + 2 == nodes ? 0 : j + 2;
            rk4_step(params_.gamma, {vertical_[j], horizontal_[j]}, {vertical_[j + 1], horizontal_[j + 1]},
                     {vertical_[j2], horizontal_[j2]}, h_, y);
            if (!(std::abs(y.v) <= blow_up_velocity)) blow_up(s.t + period * period_ + (i + 1) * h_);
        }
        check_state(y.theta, y.v, s.t + (period + 1) * period_);
    }
    return {State{y.theta, y.v, s.t + k * period_}, y.phi};
}

std::vector<State> trajectory(const PendulumParams& params_in, const State& s0, double t_final,
                              const IntegratorSettings& settings, int stride)
{
    const PendulumParams params = validated(params_in);
    validate(settings);
    require_state(s0);
    if (!(t_final >= s0.t)) throw Error(ErrorKind::invalid_argument, "t_final must not precede the initial time");
    if (stride < 1) throw Error(ErrorKind::invalid_argument, "stride must be positive");

    const double h = params.period() / settings.steps_per_period;
    const double span = t_final - s0.t;
    auto full_steps = static_cast<long long>(std::floor(span / h));
    double remainder = span - static_cast<double>(full_steps) * h;
    // Absorb round-off so an exact multiple of h does not leave a sliver step.
    if (remainder > h * (1.0 - 1e-12)) {
        ++full_steps;
        remainder = 0.0;
    }
    if (remainder < 1e-12 * h) remainder = 0.0;

    std::vector<State> out{s0};
    double theta = s0.theta, v = s0.v;
    for (long long i = 0; i < full_steps; ++i) {
        const double t = s0.t + static_cast<double>(i) * h;
        rk4_step(params.gamma, forcing_at(params, t), forcing_at(params, t + 0.5 * h), forcing_at(params, t + h), h,
                 theta, v);
        check_state(theta, v, t + h);
        if ((i + 1) % stride == 0) out.push_back({theta, v, s0.t + static_cast<double>(i + 1) * h});
    }
    if (remainder > 0.0) {
        const double t = s0.t + static_cast<double>(full_steps) * h;
        rk4_step(params.gamma, forcing_at(params, t), forcing_at(params, t + 0.5 * remainder),
                 forcing_at(params, t_final), remainder, theta, v);
        check_state(theta, v, t_final);
    }
    const bool end_recorded = remainder == 0.0 && full_steps > 0 && full_steps % stride == 0;
    if (end_recorded) out.back().t = t_final;
    else if (remainder > 0.0 || full_steps > 0) out.push_back({theta, v, t_final});
    return out;
}

State flow(const PendulumParams& params, const State& s0, double t_final, const IntegratorSettings& settings)
{
    return trajectory(params, s0, t_final, settings, std::numeric_limits<int>::max()).back();
}

StrobeResult strobe(const PendulumParams& params, const State& s0, int k, const IntegratorSettings& settings,
                    bool want_jacobian)
{
    if (k < 1) throw Error(ErrorKind::invalid_argument, "k must be at least 1");
    const StroboscopicMap map(params, settings, s0.t);
    if (want_jacobian) return map.advance_with_jacobian(s0, k);
    return {map.advance(s0, k), std::nullopt};
}

std::vector<State> record_strobes(const PendulumParams& params, const State& s0, int n_transient, int n_record,
                                  const IntegratorSettings& settings)
{
    if (n_transient < 0) throw Error(ErrorKind::invalid_argument, "n_transient must be non-negative");
    if (n_record < 1) throw Error(ErrorKind::invalid_argument, "n_record must be at least 1");
    const StroboscopicMap map(params, settings, s0.t);
    State s = map.advance(s0, n_transient);
    std::vector<State> out;
    out.reserve(n_record);
    for (int i = 0; i < n_record; ++i) {
        s = map.advance(s, 1);
        out.push_back(s);
    }
    return out;
}

IntegratorSettings refine_until_converged(const PendulumParams& params, const State& s0, int k,
                                          IntegratorSettings settings, double tol, int max_steps)
{
    validate(settings);
    State coarse = strobe(params, s0, k, settings).state;
    while (settings.steps_per_period < max_steps) {
        IntegratorSettings finer = settings;
        finer.steps_per_period *= 2;
        const State fine = strobe(params, s0, k, finer).state;
        const double diff = std::hypot(fine.theta - coarse.theta, fine.v - coarse.v);
        if (diff <= tol) return settings;
        settings = finer;
        coarse = fine;
    }
    return settings;
}

}  // namespace epend
