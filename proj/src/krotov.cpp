#include "rydsim/krotov.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "rydsim/parallel.hpp"
#include "rydsim/pulses.hpp"

namespace ryd {

void EnsembleSpec::validate() const {
    if (n_members < 1) throw std::invalid_argument("EnsembleSpec: n_members must be >= 1");
    if (ryd_range < 0.0 || amp_range < 0.0)
        throw std::invalid_argument("EnsembleSpec: ranges must be non-negative");
    if (amp_range >= 1.0)
        throw std::invalid_argument("EnsembleSpec: amp_range must stay below 100%");
}

std::vector<Perturbation> EnsembleSpec::members() const {
    validate();
    std::vector<Perturbation> out;
    out.push_back(Perturbation{0.0, 1.0, 0.0});
    int m = n_members - 1;
    if (m == 0) return out;

    const double r = ryd_range;
    const double a = amp_range;
    auto push = [&out](double ryd, double amp) {
        out.push_back(Perturbation{ryd, amp, 0.0});
    };
    if (m <= 3) {
        // too few points for a grid: box corners
        const double corners[4][2] = {{-r, 1 - a}, {r, 1 + a}, {-r, 1 + a}, {r, 1 - a}};
        for (int i = 0; i < m; ++i) push(corners[i][0], corners[i][1]);
        return out;
    }
    auto balanced_pair = [](int count) {
        int best_r = 1;
        for (int d = 2; d * d <= count; ++d)
            if (count % d == 0) best_r = d;
        return std::pair<int, int>(best_r, count / best_r);
    };
    auto [gr, ga] = balanced_pair(m);
    int target = m;
    if (gr == 1) {
        // prime member count: use the next grid up and drop the point
        // nearest the unperturbed system
        target = m + 1;
        std::tie(gr, ga) = balanced_pair(target);
    }
    auto grid_value = [](int idx, int count, double lo, double hi) {
        return count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * idx / (count - 1);
    };
    struct Point {
        double ryd, amp;
    };
    std::vector<Point> pts;
    for (int ir = 0; ir < gr; ++ir)
        for (int ia = 0; ia < ga; ++ia)
            pts.push_back({grid_value(ir, gr, -r, r), grid_value(ia, ga, 1 - a, 1 + a)});
    if (static_cast<int>(pts.size()) > m) {
        auto dist = [&](const Point& p) {
            double dr = r > 0.0 ? p.ryd / r : 0.0;
            double da = a > 0.0 ? (p.amp - 1.0) / a : 0.0;
            return dr * dr + da * da;
        };
        size_t drop = 0;
        for (size_t i = 1; i < pts.size(); ++i) {
            double di = dist(pts[i]), dd = dist(pts[drop]);
            if (di < dd - 1e-15 ||
                (std::abs(di - dd) <= 1e-15 &&
                 (pts[i].ryd < pts[drop].ryd ||
                  (pts[i].ryd == pts[drop].ryd && pts[i].amp < pts[drop].amp))))
                drop = i;
        }
        pts.erase(pts.begin() + drop);
    }
    for (const auto& p : pts) push(p.ryd, p.amp);
    return out;
}

void KrotovConfig::validate() const {
    for (double l : lambda)
        if (l < 0.0) throw std::invalid_argument("KrotovConfig: lambda must be >= 0");
    if (!(lambda_auto_fraction > 0.0))
        throw std::invalid_argument("KrotovConfig: lambda_auto_fraction must be positive");
    if (max_iters < 0) throw std::invalid_argument("KrotovConfig: max_iters must be >= 0");
    if (j_tol < 0.0) throw std::invalid_argument("KrotovConfig: j_tol must be >= 0");
}

double krotov_shape(const TimeGrid& grid, int k) {
    double t0 = grid.midpoint(0);
    double span = grid.midpoint(grid.n_steps - 1) - t0;
    return blackman(grid.midpoint(k), t0, span, 1.0);
}

namespace {

struct MemberCtx {
    SystemParams params;
    double amp_scale;
};

std::vector<MemberCtx> member_contexts(const SystemParams& base,
                                       const EnsembleSpec& ensemble) {
    std::vector<MemberCtx> out;
    for (const auto& p : ensemble.members()) {
        MemberCtx ctx{base, p.amp_scale};
        ctx.params.delta2 += p.delta_ryd;
        out.push_back(ctx);
    }
    return out;
}

std::array<Mat16, 16> liouville_basis() {
    std::array<Mat16, 16> basis_elems;
    for (int i = 0; i < 16; ++i) {
        basis_elems[i] = Mat16::Zero();
        basis_elems[i](basis::logical[i / 4], basis::logical[i % 4]) = 1.0;
    }
    return basis_elems;
}

struct SparseGen {
    struct Entry {
        int row, col;
        complexd weight;
    };
    std::vector<Entry> entries;
};

// d H / d Re(Omega_j) and d H / d Im(Omega_j) for the four channels; the
// couplings enter H as Omega/2.
std::array<std::array<SparseGen, 2>, 4> control_generators() {
    std::array<std::array<SparseGen, 2>, 4> gens;
    for (int c = 0; c < 4; ++c) {
        Channel ch = static_cast<Channel>(c);
        bool right = is_right_atom(ch);
        bool blue = ch == Channel::BlueLeft || ch == Channel::BlueRight;
        int from = blue ? basis::q0 : basis::li;
        int to = blue ? basis::li : basis::lr;
        for (int other = 0; other < 4; ++other) {
            int up_r = right ? basis::pair_index(other, from) : basis::pair_index(from, other);
            int up_c = right ? basis::pair_index(other, to) : basis::pair_index(to, other);
            gens[c][0].entries.push_back({up_r, up_c, 0.5});
            gens[c][0].entries.push_back({up_c, up_r, 0.5});
            gens[c][1].entries.push_back({up_r, up_c, complexd(0.0, 0.5)});
            gens[c][1].entries.push_back({up_c, up_r, complexd(0.0, -0.5)});
        }
    }
    return gens;
}

struct StepCache {
    detail::StepEig eig;
    Mat16 u;  // exp(-i H dt)
};

// phi(theta) = (e^{i theta} - 1) / (i theta): Frechet factor turning the
// bare control generator into the exact derivative of the step exponential.
inline complexd phi_factor(double theta) {
    if (std::abs(theta) < 1e-8) return complexd(1.0 - theta * theta / 6.0, 0.5 * theta);
    return (std::polar(1.0, theta) - 1.0) / complexd(0.0, theta);
}

class KrotovEngine {
  public:
    KrotovEngine(const SystemParams& params, const ControlSet& guess,
                 const Mat16& target, const EnsembleSpec& ensemble,
                 const KrotovConfig& config)
        : controls_(guess),
          config_(config),
          members_(member_contexts(params, ensemble)),
          gens_(control_generators()),
          rho0_(liouville_basis()) {
        params.validate();
        guess.check_finite();
        config.validate();
        n_members_ = static_cast<int>(members_.size());
        n_steps_ = controls_.n_steps();
        dt_ = controls_.grid().dt();
        gamma_ = 1.0 / params.tau_i;
        norm_ = config_.normalize_fidelity ? 16.0 * n_members_ : 1.0;
        for (int i = 0; i < 16; ++i) targets_[i] = target * rho0_[i] * target.adjoint();
        shape_.resize(n_steps_);
        for (int k = 0; k < n_steps_; ++k) shape_[k] = krotov_shape(controls_.grid(), k);
        cache_.resize(static_cast<size_t>(n_steps_) * n_members_);
        rho_.resize(static_cast<size_t>(n_members_) * 16);
        seg_len_ = std::max(1, static_cast<int>(std::lround(std::sqrt(n_steps_))));
        n_segments_ = (n_steps_ + seg_len_ - 1) / seg_len_;
        checkpoints_.assign(static_cast<size_t>(n_segments_ + 1) * n_members_ * 16,
                            Mat16::Zero());
        window_.assign(static_cast<size_t>(seg_len_) * n_members_ * 16, Mat16::Zero());
        refresh_cache_and_forward();
    }

    const ControlSet& controls() const { return controls_; }
    int n_steps() const { return n_steps_; }
    double dt() const { return dt_; }
    double shape(int k) const { return shape_[k]; }

    double fidelity_raw() const {
        double f = 0.0;
        for (int n = 0; n < n_members_; ++n)
            for (int i = 0; i < 16; ++i)
                f += (targets_[i].adjoint() * rho_[n * 16 + i]).trace().real();
        return f;
    }

    double fidelity_term() const { return fidelity_raw() / norm_; }

    std::vector<double> member_errors() const {
        std::vector<double> errs(n_members_);
        for (int n = 0; n < n_members_; ++n) {
            double f = 0.0;
            for (int i = 0; i < 16; ++i)
                f += (targets_[i].adjoint() * rho_[n * 16 + i]).trace().real();
            errs[n] = 1.0 - f / 16.0;
        }
        return errs;
    }

    // Backward costate pass with the current controls, keeping sigma
    // checkpoints at segment boundaries.
    void backward_pass() {
        parallel_for(n_members_ * 16, config_.n_jobs, [&](int t) {
            int n = t / 16, i = t % 16;
            Mat16 sigma = targets_[i];
            checkpoint(n_segments_, n, i) = sigma;
            for (int k = n_steps_ - 1; k >= 0; --k) {
                const StepCache& sc = cache_[step_index(k, n)];
                detail::dissipator_flow_adjoint(sigma, gamma_, 0.5 * dt_);
                sigma = sc.u.adjoint() * sigma * sc.u;  // mid-step costate
                detail::dissipator_flow_adjoint(sigma, gamma_, 0.5 * dt_);
                if (k % seg_len_ == 0) checkpoint(k / seg_len_, n, i) = sigma;
            }
        });
    }

    // One forward sweep. With apply_updates the control value of each step
    // is shifted by the Krotov update before the step is taken; the
    // accumulated penalty sum_j lambda_j |dOmega|^2 / S dt and the gradient
    // of the fidelity term (frozen controls) come back to the caller.
    struct SweepResult {
        double penalty = 0.0;
        GradientResult gradient;
    };

    SweepResult sweep(bool apply_updates, const std::array<double, 4>& lambda,
                      bool want_gradient) {
        SweepResult result;
        if (want_gradient)
            for (auto& ch : result.gradient.grad)
                for (auto& q : ch) q = Eigen::VectorXd::Zero(n_steps_);
        parallel_for(n_members_ * 16, config_.n_jobs,
                     [&](int t) { rho_[t] = rho0_[t % 16]; });
        for (int k = 0; k < n_steps_; ++k) {
            if (k % seg_len_ == 0) fill_window(k / seg_len_);
            // first dissipator half-stage
            parallel_for(n_members_ * 16, config_.n_jobs, [&](int t) {
                detail::dissipator_flow(rho_[t], gamma_, 0.5 * dt_);
            });
            // Im tr(sigma^dag [dH/dOmega, rho]) per member and quadrature,
            // with the Frechet correction making it the exact discrete
            // gradient at frozen controls.
            std::array<std::array<double, 2>, 4> trace_sum = {};
            std::vector<std::array<std::array<double, 2>, 4>> per_member(n_members_);
            parallel_for(n_members_, config_.n_jobs, [&](int n) {
                per_member[n] = member_traces(k, n);
            });
            for (int n = 0; n < n_members_; ++n)
                for (int c = 0; c < 4; ++c)
                    for (int q = 0; q < 2; ++q)
                        trace_sum[c][q] += per_member[n][c][q];
            if (want_gradient)
                for (int c = 0; c < 4; ++c)
                    for (int q = 0; q < 2; ++q)
                        result.gradient.grad[c][q](k) = dt_ * trace_sum[c][q] / norm_;
            if (apply_updates) {
                double s = shape_[k];
                for (int c = 0; c < 4; ++c) {
                    complexd delta(s * trace_sum[c][0] / (lambda[c] * norm_),
                                   s * trace_sum[c][1] / (lambda[c] * norm_));
                    if (s > 0.0)
                        result.penalty += lambda[c] * std::norm(delta) / s * dt_;
                    controls_.channel(static_cast<Channel>(c))(k) += delta;
                }
            }
            // refresh the step cache for the (possibly updated) controls and
            // finish the step
            ControlSample sample = controls_.sample(k);
            parallel_for(n_members_, config_.n_jobs, [&](int n) {
                refresh_step(k, n, sample);
            });
            parallel_for(n_members_ * 16, config_.n_jobs, [&](int t) {
                int n = t / 16;
                const StepCache& sc = cache_[step_index(k, n)];
                rho_[t] = sc.u * rho_[t] * sc.u.adjoint();
                detail::dissipator_flow(rho_[t], gamma_, 0.5 * dt_);
            });
        }
        if (want_gradient) result.gradient.fidelity_term = fidelity_term();
        return result;
    }

  private:
    size_t step_index(int k, int n) const {
        return static_cast<size_t>(k) * n_members_ + n;
    }
    Mat16& checkpoint(int c, int n, int i) {
        return checkpoints_[(static_cast<size_t>(c) * n_members_ + n) * 16 + i];
    }
    Mat16& window(int offset, int n, int i) {
        return window_[(static_cast<size_t>(offset) * n_members_ + n) * 16 + i];
    }

    void refresh_step(int k, int n, const ControlSample& base_sample) {
        ControlSample s = base_sample;
        double a = members_[n].amp_scale;
        s.blue_left *= a;
        s.red_left *= a;
        s.blue_right *= a;
        s.red_right *= a;
        StepCache& sc = cache_[step_index(k, n)];
        sc.eig = detail::eigendecompose(build_h2q(members_[n].params, s));
        sc.u = sc.eig.unitary(dt_);
    }

    void refresh_cache_and_forward() {
        parallel_for(n_members_ * 16, config_.n_jobs,
                     [&](int t) { rho_[t] = rho0_[t % 16]; });
        for (int k = 0; k < n_steps_; ++k) {
            ControlSample sample = controls_.sample(k);
            parallel_for(n_members_, config_.n_jobs,
                         [&](int n) { refresh_step(k, n, sample); });
            parallel_for(n_members_ * 16, config_.n_jobs, [&](int t) {
                int n = t / 16;
                const StepCache& sc = cache_[step_index(k, n)];
                detail::dissipator_flow(rho_[t], gamma_, 0.5 * dt_);
                rho_[t] = sc.u * rho_[t] * sc.u.adjoint();
                detail::dissipator_flow(rho_[t], gamma_, 0.5 * dt_);
            });
        }
    }

    // Re-derive the mid-step costates for one segment from its upper
    // checkpoint (old controls).
    void fill_window(int segment) {
        int lo = segment * seg_len_;
        int hi = std::min(n_steps_, lo + seg_len_);
        parallel_for(n_members_ * 16, config_.n_jobs, [&](int t) {
            int n = t / 16, i = t % 16;
            Mat16 sigma = checkpoint(hi == n_steps_ && hi % seg_len_ != 0
                                         ? n_segments_
                                         : hi / seg_len_,
                                     n, i);
            for (int k = hi - 1; k >= lo; --k) {
                const StepCache& sc = cache_[step_index(k, n)];
                detail::dissipator_flow_adjoint(sigma, gamma_, 0.5 * dt_);
                sigma = sc.u.adjoint() * sigma * sc.u;
                window(k - lo, n, i) = sigma;
                detail::dissipator_flow_adjoint(sigma, gamma_, 0.5 * dt_);
            }
        });
    }

    std::array<std::array<double, 2>, 4> member_traces(int k, int n) {
        const StepCache& sc = cache_[step_index(k, n)];
        const Mat16& v = sc.eig.vectors;
        Mat16 m = Mat16::Zero();
        for (int i = 0; i < 16; ++i) {
            const Mat16& rho = rho_[n * 16 + i];
            const Mat16& sig = window(k % seg_len_, n, i);
            m.noalias() += rho * sig.adjoint();
            m.noalias() -= sig.adjoint() * rho;
        }
        Mat16 mhat = v.adjoint() * m * v;
        // P(a,b) = phi((l_a - l_b) dt) * Mhat(b,a)
        Mat16 p;
        for (int a = 0; a < 16; ++a)
            for (int b = 0; b < 16; ++b)
                p(a, b) = phi_factor((sc.eig.values(a) - sc.eig.values(b)) * dt_) *
                          mhat(b, a);
        std::array<std::array<double, 2>, 4> traces = {};
        double s_n = members_[n].amp_scale;
        for (int c = 0; c < 4; ++c)
            for (int q = 0; q < 2; ++q) {
                complexd acc(0.0, 0.0);
                for (const auto& e : gens_[c][q].entries)
                    acc += e.weight * (v.row(e.row).conjugate() * p * v.row(e.col).transpose())(0);
                traces[c][q] = s_n * acc.imag();
            }
        return traces;
    }

    ControlSet controls_;
    KrotovConfig config_;
    std::vector<MemberCtx> members_;
    std::array<std::array<SparseGen, 2>, 4> gens_;
    std::array<Mat16, 16> rho0_;
    std::array<Mat16, 16> targets_;
    int n_members_ = 0;
    int n_steps_ = 0;
    double dt_ = 0.0;
    double gamma_ = 0.0;
    double norm_ = 1.0;
    std::vector<double> shape_;
    std::vector<StepCache> cache_;
    std::vector<Mat16> rho_;
    int seg_len_ = 1;
    int n_segments_ = 0;
    std::vector<Mat16> checkpoints_;
    std::vector<Mat16> window_;
};

}  // namespace

FunctionalTerms functional_terms(const std::vector<std::array<Mat16, 16>>& states_T,
                                 const Mat16& target, const ControlSet& controls,
                                 const ControlSet& reference,
                                 const std::array<double, 4>& lambda, bool normalize,
                                 int n_members) {
    if (static_cast<int>(states_T.size()) != n_members)
        throw std::invalid_argument("functional_terms: wrong number of members");
    if (controls.grid() != reference.grid())
        throw std::invalid_argument("functional_terms: controls and reference grids differ");
    auto rho0 = liouville_basis();
    FunctionalTerms terms;
    double norm = normalize ? 16.0 * n_members : 1.0;
    terms.member_errors.resize(n_members);
    for (int n = 0; n < n_members; ++n) {
        double f = 0.0;
        for (int i = 0; i < 16; ++i) {
            Mat16 tgt = target * rho0[i] * target.adjoint();
            f += (tgt.adjoint() * states_T[n][i]).trace().real();
        }
        terms.fidelity_term += f;
        terms.member_errors[n] = 1.0 - f / 16.0;
    }
    terms.fidelity_term /= norm;
    double dt = controls.grid().dt();
    for (int c = 0; c < 4; ++c) {
        const auto& cur = controls.channel(static_cast<Channel>(c));
        const auto& ref = reference.channel(static_cast<Channel>(c));
        for (int k = 0; k < controls.n_steps(); ++k) {
            double diff2 = std::norm(cur(k) - ref(k));
            if (diff2 == 0.0) continue;
            double s = krotov_shape(controls.grid(), k);
            if (s <= 0.0)
                throw std::invalid_argument(
                    "functional_terms: controls differ from reference where S(t) = 0");
            terms.penalty_term += lambda[c] * diff2 / s * dt;
        }
    }
    terms.j = 1.0 - terms.fidelity_term + terms.penalty_term;
    return terms;
}

GradientResult krotov_gradient(const SystemParams& params, const ControlSet& controls,
                               const Mat16& target, const EnsembleSpec& ensemble,
                               const KrotovConfig& config) {
    KrotovEngine engine(params, controls, target, ensemble, config);
    engine.backward_pass();
    auto res = engine.sweep(false, {1, 1, 1, 1}, true);
    return std::move(res.gradient);
}

OptimizeResult optimize(const SystemParams& params, const ControlSet& guess,
                        const Mat16& target, const EnsembleSpec& ensemble,
                        const KrotovConfig& config) {
    using clock = std::chrono::steady_clock;
    auto t_start = clock::now();
    KrotovEngine engine(params, guess, target, ensemble, config);
    OptimizationRecord record;

    auto elapsed = [&] {
        return std::chrono::duration<double>(clock::now() - t_start).count();
    };
    auto push_stats = [&](int iter, double j, double fid, double pen) {
        IterationStats st;
        st.iter = iter;
        st.j_total = j;
        st.fidelity_term = fid;
        st.penalty_term = pen;
        st.member_errors = engine.member_errors();
        st.worst_member_error =
            *std::max_element(st.member_errors.begin(), st.member_errors.end());
        st.wall_seconds = elapsed();
        record.iterations.push_back(st);
        if (config.verbose)
            std::printf("iter %4d  J %.12g  fidelity %.12g  penalty %.3g  worst %.3g\n",
                        iter, j, fid, pen, st.worst_member_error);
    };

    double fid0 = engine.fidelity_term();
    double j_prev = 1.0 - fid0;
    push_stats(0, j_prev, fid0, 0.0);

    std::array<double, 4> lambda = config.lambda;
    bool need_auto = std::any_of(lambda.begin(), lambda.end(),
                                 [](double l) { return l == 0.0; });
    if (need_auto) {
        engine.backward_pass();
        auto probe = engine.sweep(false, {1, 1, 1, 1}, true);
        double global_peak = std::max(guess.peak_amplitude(), 1e-30);
        for (int c = 0; c < 4; ++c) {
            if (lambda[c] != 0.0) continue;
            double numer = 0.0;
            for (int k = 0; k < engine.n_steps(); ++k) {
                double gx = probe.gradient.grad[c][0](k);
                double gy = probe.gradient.grad[c][1](k);
                numer = std::max(numer,
                                 engine.shape(k) * std::hypot(gx, gy) / engine.dt());
            }
            double peak = guess.peak_amplitude(static_cast<Channel>(c));
            if (peak <= 0.0) peak = global_peak;
            lambda[c] = numer > 0.0
                            ? numer / (config.lambda_auto_fraction * peak)
                            : 1.0;
        }
    }
    record.lambda_used = lambda;

    for (int iter = 1; iter <= config.max_iters; ++iter) {
        engine.backward_pass();
        auto res = engine.sweep(true, lambda, false);
        double fid = engine.fidelity_term();
        double j = 1.0 - fid + res.penalty;
        push_stats(iter, j, fid, res.penalty);
        if (j > j_prev + 1e-8)
            throw std::runtime_error("krotov: non-monotonic step (J increased by " +
                                     std::to_string(j - j_prev) + ")");
        double dj = j_prev - j;
        j_prev = j;
        if (config.j_tol > 0.0 && dj < config.j_tol) break;
    }
    return OptimizeResult{engine.controls(), std::move(record)};
}

}  // namespace ryd
