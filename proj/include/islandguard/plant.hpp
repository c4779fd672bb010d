#ifndef ISLANDGUARD_PLANT_HPP
#define ISLANDGUARD_PLANT_HPP

#include "islandguard/signals.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace islandguard {

/// Thevenin grid source behind R_g, L_g.
struct GridParams {
    double v_ll = 480.0;    // line-to-line RMS volts
    double f_g = 60.0;      // Hz
    double r_g = 0.012;     // ohms
    double l_g = 0.3056e-3; // henries

    double phase_peak() const { return v_ll * std::sqrt(2.0 / 3.0); }

    void validate() const {
        if (!(v_ll > 0.0 && f_g > 0.0 && r_g > 0.0 && l_g > 0.0))
            throw std::invalid_argument("GridParams: all parameters must be positive");
        if (f_g < 40.0 || f_g > 70.0)
            throw std::invalid_argument("GridParams: f_g outside [40, 70] Hz");
    }
};

/// Parallel RLC load, per-phase wye equivalent.
struct LoadParams {
    double r = 0.0; // ohms
    double l = 0.0; // henries
    double c = 0.0; // farads

    double q_f() const { return r * std::sqrt(c / l); }
    double f_0() const { return 1.0 / (two_pi * std::sqrt(l * c)); }

    void validate() const {
        if (!(r > 0.0 && l > 0.0 && c > 0.0))
            throw std::invalid_argument("LoadParams: r, l, c must be positive");
    }
};

/// Switched auxiliary load (parallel R with optional L or C branch).
struct AuxLoadParams {
    double g = 0.0;                 // conductance, siemens
    std::optional<double> l;        // henries, inductive branch
    std::optional<double> c;        // farads, capacitive branch

    /// Sized from apparent power and power factor at the given bus voltage.
    /// Negative pf means leading (capacitive) reactive power.
    static AuxLoadParams from_power(double s_va, double pf, double v_ll, double f) {
        if (!(s_va > 0.0) || std::abs(pf) > 1.0 || std::abs(pf) <= 0.0)
            throw std::invalid_argument("AuxLoadParams: need s_va > 0 and 0 < |pf| <= 1");
        AuxLoadParams aux;
        const double p = s_va * std::abs(pf);
        const double q = s_va * std::sqrt(std::max(0.0, 1.0 - pf * pf));
        aux.g = p / (v_ll * v_ll);
        if (q > 0.0) {
            if (pf > 0.0)
                aux.l = v_ll * v_ll / (two_pi * f * q);
            else
                aux.c = q / (two_pi * f * v_ll * v_ll);
        }
        return aux;
    }
};

/// Continuous state of the circuit. Branch currents and the PCC voltage are
/// carried per phase in abc coordinates.
struct PlantState {
    ThreePhase v_pcc;                 // capacitor / PCC voltage
    ThreePhase i_load_l;              // main load inductor current
    ThreePhase i_aux_l;               // auxiliary load inductor current
    ThreePhase i_grid;                // grid branch current
    std::vector<ThreePhase> i_inv;    // filter inductor current, one per DG
    bool breaker_closed = true;
    bool aux_connected = false;
    double t = 0.0;

    ThreePhase i_inv_total() const {
        ThreePhase s;
        for (const auto& i : i_inv) s = s + i;
        return s;
    }
};

struct PlantEvent {
    enum class Kind { island, connect_load, disconnect_load };
    Kind kind = Kind::island;
    AuxLoadParams aux; // connect_load only
};

namespace detail {

/// Dense row-major matrix, capacity 8x8, runtime dimension. Big enough for
/// the PCC node plus grid, two load inductors and two DG branches.
struct SmallMatrix {
    static constexpr int cap = 8;
    int n = 0;
    std::array<double, cap * cap> a{};

    double& at(int r, int c) { return a[static_cast<std::size_t>(r * cap + c)]; }
    double at(int r, int c) const { return a[static_cast<std::size_t>(r * cap + c)]; }

    static SmallMatrix identity(int n) {
        SmallMatrix m;
        m.n = n;
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }
};

/// Solves M * X = B in place via Gaussian elimination with partial pivoting.
/// B holds multiple right-hand sides as columns of a SmallMatrix.
inline SmallMatrix solve(SmallMatrix m, SmallMatrix b) {
    const int n = m.n;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(m.at(r, col)) > std::abs(m.at(piv, col))) piv = r;
        if (std::abs(m.at(piv, col)) < 1e-14)
            throw std::runtime_error("SmallMatrix::solve: singular system");
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(m.at(piv, c), m.at(col, c));
            for (int c = 0; c < b.n; ++c) std::swap(b.at(piv, c), b.at(col, c));
        }
        const double inv = 1.0 / m.at(col, col);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = m.at(r, col) * inv;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) m.at(r, c) -= f * m.at(col, c);
            for (int c = 0; c < b.n; ++c) b.at(r, c) -= f * b.at(col, c);
        }
    }
    for (int r = 0; r < n; ++r) {
        const double inv = 1.0 / m.at(r, r);
        for (int c = 0; c < b.n; ++c) b.at(r, c) *= inv;
    }
    return b;
}

} // namespace detail

/// Islanding test circuit: stiff source behind R_g/L_g and a breaker,
/// parallel RLC load at the PCC, one or more average-value inverters each
/// behind a filter inductance. Fixed-step trapezoidal integration; the
/// update matrices are rebuilt only on topology or step-size changes.
class Plant {
public:
    Plant(GridParams grid, LoadParams load, std::vector<double> l_filter)
        : grid_(grid), load_(load), l_filter_(std::move(l_filter)) {
        grid_.validate();
        load_.validate();
        for (double lf : l_filter_)
            if (!(lf > 0.0)) throw std::invalid_argument("Plant: filter inductance must be positive");
        state_.i_inv.resize(l_filter_.size());
    }

    const PlantState& state() const { return state_; }
    PlantState& state() { return state_; }
    const GridParams& grid() const { return grid_; }
    const LoadParams& load() const { return load_; }
    std::size_t dg_count() const { return l_filter_.size(); }
    double filter_inductance(std::size_t k) const { return l_filter_.at(k); }

    /// Grid electromotive force (behind the source impedance) at time t.
    ThreePhase grid_emf(double t) const {
        return synth_balanced(grid_.phase_peak(), grid_.f_g, 0.0, t);
    }

    /// Advances the circuit one step with the inverter terminal voltages
    /// held constant over the interval.
    void step(const std::vector<ThreePhase>& v_inverter_terminal, double dt) {
        step(v_inverter_terminal, v_inverter_terminal, dt);
    }

    /// Trapezoidal step with the inverter terminal voltages given at both
    /// interval endpoints, so a rotating command enters without the
    /// zero-order-hold phase ripple.
    void step(const std::vector<ThreePhase>& v_inv_begin,
              const std::vector<ThreePhase>& v_inv_end, double dt) {
        if (!(dt >= 1e-6 && dt <= 2e-4))
            throw std::invalid_argument("Plant::step: dt outside [1e-6, 2e-4] s");
        if (v_inv_begin.size() != l_filter_.size() || v_inv_end.size() != l_filter_.size())
            throw std::invalid_argument("Plant::step: one terminal voltage per DG required");
        if (dt != dt_cached_ || !matrices_valid_) rebuild(dt);

        const ThreePhase eg0 = state_.breaker_closed ? grid_emf(state_.t) : ThreePhase{};
        const ThreePhase eg1 = state_.breaker_closed ? grid_emf(state_.t + dt) : ThreePhase{};

        for (int ph = 0; ph < 3; ++ph) {
            std::array<double, detail::SmallMatrix::cap> x{};
            gather(ph, x);
            std::array<double, detail::SmallMatrix::cap> u{};
            u[0] = pick(eg0, ph) + pick(eg1, ph);
            for (std::size_t k = 0; k < l_filter_.size(); ++k)
                u[1 + k] = pick(v_inv_begin[k], ph) + pick(v_inv_end[k], ph);

            std::array<double, detail::SmallMatrix::cap> xn{};
            for (int i = 0; i < n_; ++i) {
                double s = 0.0;
                for (int j = 0; j < n_; ++j) s += m_state_.at(i, j) * x[static_cast<std::size_t>(j)];
                for (int j = 0; j < n_in_; ++j) s += m_input_.at(i, j) * u[static_cast<std::size_t>(j)];
                xn[static_cast<std::size_t>(i)] = s;
            }
            scatter(ph, xn);
        }
        state_.t += dt;

        if (!std::isfinite(state_.v_pcc.a) || !std::isfinite(state_.i_load_l.a) ||
            !std::isfinite(state_.i_grid.a))
            throw std::runtime_error("Plant::step: state diverged at t = " + std::to_string(state_.t));
    }

    /// Timed topology changes: breaker opening and auxiliary load switching.
    void apply_event(const PlantEvent& ev) {
        switch (ev.kind) {
        case PlantEvent::Kind::island:
            if (!state_.breaker_closed)
                throw std::logic_error("apply_event: duplicate island event");
            state_.breaker_closed = false;
            state_.i_grid = {};
            break;
        case PlantEvent::Kind::connect_load:
            if (state_.aux_connected)
                throw std::logic_error("apply_event: auxiliary load already connected");
            aux_ = ev.aux;
            state_.aux_connected = true;
            state_.i_aux_l = {};
            break;
        case PlantEvent::Kind::disconnect_load:
            if (!state_.aux_connected)
                throw std::logic_error("apply_event: no auxiliary load to disconnect");
            state_.aux_connected = false;
            state_.i_aux_l = {};
            aux_ = {};
            break;
        }
        matrices_valid_ = false;
    }

    /// KCL residual at the PCC for the step prev -> next, normalized by the
    /// given rated current. Exact up to roundoff for the trapezoidal update.
    double kcl_residual(const PlantState& prev, const PlantState& next,
                        const std::vector<ThreePhase>& v_inv_held, double dt,
                        double i_rated) const {
        const double c_tot = total_capacitance();
        const double g_tot = total_conductance();
        double worst = 0.0;
        for (int ph = 0; ph < 3; ++ph) {
            auto inj = [&](const PlantState& s) {
                double sum = pick(s.i_grid, ph);
                for (const auto& ii : s.i_inv) sum += pick(ii, ph);
                (void)v_inv_held;
                sum -= g_tot * pick(s.v_pcc, ph);
                sum -= pick(s.i_load_l, ph);
                sum -= pick(s.i_aux_l, ph);
                return sum;
            };
            const double i_c = c_tot * (pick(next.v_pcc, ph) - pick(prev.v_pcc, ph)) / dt;
            const double r = 0.5 * (inj(prev) + inj(next)) - i_c;
            worst = std::max(worst, std::abs(r));
        }
        return worst / i_rated;
    }

    /// Energy stored in all reactive elements.
    double stored_energy() const {
        const double c_tot = total_capacitance();
        double e = 0.0;
        for (int ph = 0; ph < 3; ++ph) {
            const double v = pick(state_.v_pcc, ph);
            e += 0.5 * c_tot * v * v;
            const double il = pick(state_.i_load_l, ph);
            e += 0.5 * load_.l * il * il;
            if (state_.aux_connected && aux_.l) {
                const double ia = pick(state_.i_aux_l, ph);
                e += 0.5 * *aux_.l * ia * ia;
            }
            if (state_.breaker_closed) {
                const double ig = pick(state_.i_grid, ph);
                e += 0.5 * grid_.l_g * ig * ig;
            }
            for (std::size_t k = 0; k < l_filter_.size(); ++k) {
                const double ii = pick(state_.i_inv[k], ph);
                e += 0.5 * l_filter_[k] * ii * ii;
            }
        }
        return e;
    }

    /// Power dissipated in all resistive elements.
    double dissipated_power() const {
        const double g_tot = total_conductance();
        double p = 0.0;
        for (int ph = 0; ph < 3; ++ph) {
            const double v = pick(state_.v_pcc, ph);
            p += g_tot * v * v;
            if (state_.breaker_closed) {
                const double ig = pick(state_.i_grid, ph);
                p += grid_.r_g * ig * ig;
            }
        }
        return p;
    }

    double total_capacitance() const {
        double c = load_.c;
        if (state_.aux_connected && aux_.c) c += *aux_.c;
        return c;
    }

    double total_conductance() const {
        double g = 1.0 / load_.r;
        if (state_.aux_connected) g += aux_.g;
        return g;
    }

private:
    static double pick(const ThreePhase& x, int ph) { return ph == 0 ? x.a : (ph == 1 ? x.b : x.c); }
    static void put(ThreePhase& x, int ph, double v) { (ph == 0 ? x.a : (ph == 1 ? x.b : x.c)) = v; }

    void gather(int ph, std::array<double, detail::SmallMatrix::cap>& x) const {
        x[0] = pick(state_.v_pcc, ph);
        x[1] = pick(state_.i_load_l, ph);
        x[2] = pick(state_.i_aux_l, ph);
        x[3] = pick(state_.i_grid, ph);
        for (std::size_t k = 0; k < l_filter_.size(); ++k) x[4 + k] = pick(state_.i_inv[k], ph);
    }

    void scatter(int ph, const std::array<double, detail::SmallMatrix::cap>& x) {
        put(state_.v_pcc, ph, x[0]);
        put(state_.i_load_l, ph, x[1]);
        put(state_.i_aux_l, ph, state_.aux_connected && aux_.l ? x[2] : 0.0);
        put(state_.i_grid, ph, state_.breaker_closed ? x[3] : 0.0);
        for (std::size_t k = 0; k < l_filter_.size(); ++k) put(state_.i_inv[k], ph, x[4 + k]);
    }

    void rebuild(double dt) {
        const int n_dg = static_cast<int>(l_filter_.size());
        n_ = 4 + n_dg;
        n_in_ = 1 + n_dg;

        const double c_tot = total_capacitance();
        const double g_tot = total_conductance();

        detail::SmallMatrix a;
        a.n = n_;
        a.at(0, 0) = -g_tot / c_tot;
        a.at(0, 1) = -1.0 / c_tot;
        if (state_.aux_connected && aux_.l) a.at(0, 2) = -1.0 / c_tot;
        if (state_.breaker_closed) a.at(0, 3) = 1.0 / c_tot;
        for (int k = 0; k < n_dg; ++k) a.at(0, 4 + k) = 1.0 / c_tot;

        a.at(1, 0) = 1.0 / load_.l;
        if (state_.aux_connected && aux_.l) a.at(2, 0) = 1.0 / *aux_.l;
        if (state_.breaker_closed) {
            a.at(3, 0) = -1.0 / grid_.l_g;
            a.at(3, 3) = -grid_.r_g / grid_.l_g;
        }
        for (int k = 0; k < n_dg; ++k) a.at(4 + k, 0) = -1.0 / l_filter_[static_cast<std::size_t>(k)];

        detail::SmallMatrix b;
        b.n = n_in_;
        if (state_.breaker_closed) b.at(3, 0) = 1.0 / grid_.l_g;
        for (int k = 0; k < n_dg; ++k) b.at(4 + k, 1 + k) = 1.0 / l_filter_[static_cast<std::size_t>(k)];

        // (I - h/2 A) x+ = (I + h/2 A) x + h/2 B (u_n + u_n+1)
        detail::SmallMatrix lhs = detail::SmallMatrix::identity(n_);
        detail::SmallMatrix rhs = detail::SmallMatrix::identity(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                lhs.at(i, j) -= 0.5 * dt * a.at(i, j);
                rhs.at(i, j) += 0.5 * dt * a.at(i, j);
            }
        m_state_ = detail::solve(lhs, rhs);

        detail::SmallMatrix hb;
        hb.n = n_in_;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_in_; ++j) hb.at(i, j) = 0.5 * dt * b.at(i, j);
        detail::SmallMatrix lhs2 = detail::SmallMatrix::identity(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) lhs2.at(i, j) -= 0.5 * dt * a.at(i, j);
        m_input_ = detail::solve(lhs2, hb);

        dt_cached_ = dt;
        matrices_valid_ = true;
    }

    GridParams grid_;
    LoadParams load_;
    std::vector<double> l_filter_;
    AuxLoadParams aux_;
    PlantState state_;

    detail::SmallMatrix m_state_;
    detail::SmallMatrix m_input_;
    int n_ = 0;
    int n_in_ = 0;
    double dt_cached_ = -1.0;
    bool matrices_valid_ = false;
};

/// Phasor solution of the grid-connected circuit with the DGs treated as a
/// unity-power-factor current source at the PCC. Used to start simulations
/// at equilibrium.
struct SteadyStateInit {
    PlantState state;          // at t = 0
    double v_pcc_peak = 0.0;   // phase peak at the PCC
    double v_pcc_angle = 0.0;  // phase-a angle at t = 0
    std::vector<std::complex<double>> v_inv; // inverter terminal phasors
};

inline SteadyStateInit init_steady_state(const GridParams& grid, const LoadParams& load,
                                         const std::vector<double>& l_filter,
                                         const std::vector<double>& dg_power) {
    grid.validate();
    load.validate();
    if (dg_power.size() != l_filter.size())
        throw std::invalid_argument("init_steady_state: one power per DG required");

    using cplx = std::complex<double>;
    const double w = two_pi * grid.f_g;
    const double v_rated = grid.phase_peak();

    double p_total = 0.0;
    for (double p : dg_power) {
        if (p < 0.0) throw std::invalid_argument("init_steady_state: dg_power must be >= 0");
        p_total += p;
    }
    const double i_total = 2.0 * p_total / (3.0 * v_rated); // amplitude-invariant frame

    const cplx z_g(grid.r_g, w * grid.l_g);
    const cplx y_load = cplx(1.0 / load.r, 0.0) + 1.0 / cplx(0.0, w * load.l) + cplx(0.0, w * load.c);
    const cplx e(v_rated, 0.0);

    // Align the current source with the PCC voltage (unity power factor).
    double delta = 0.0;
    cplx v;
    for (int it = 0; it < 60; ++it) {
        const cplx i_inv = std::polar(i_total, delta);
        v = (e / z_g + i_inv) / (y_load + 1.0 / z_g);
        const double newdelta = std::arg(v);
        if (std::abs(newdelta - delta) < 1e-14) { delta = newdelta; break; }
        delta = newdelta;
    }
    const cplx i_inv_total = std::polar(i_total, delta);
    const cplx i_grid = (e - v) / z_g;
    const cplx i_load_l = v / cplx(0.0, w * load.l);

    if (!std::isfinite(std::abs(v)))
        throw std::runtime_error("init_steady_state: phasor solution did not converge");

    SteadyStateInit out;
    out.v_pcc_peak = std::abs(v);
    out.v_pcc_angle = std::arg(v);

    auto sample = [](const cplx& ph, double shift) { return std::real(ph * std::polar(1.0, shift)); };
    auto to_abc = [&](const cplx& ph) {
        return ThreePhase{sample(ph, 0.0), sample(ph, -two_pi / 3.0), sample(ph, two_pi / 3.0)};
    };

    out.state.v_pcc = to_abc(v);
    out.state.i_load_l = to_abc(i_load_l);
    out.state.i_grid = to_abc(i_grid);
    out.state.breaker_closed = true;
    out.state.t = 0.0;
    for (std::size_t k = 0; k < l_filter.size(); ++k) {
        const cplx i_k = i_inv_total / static_cast<double>(l_filter.size());
        out.state.i_inv.push_back(to_abc(i_k));
        out.v_inv.push_back(v + cplx(0.0, w * l_filter[k]) * i_k);
    }
    return out;
}

} // namespace islandguard

#endif // ISLANDGUARD_PLANT_HPP
