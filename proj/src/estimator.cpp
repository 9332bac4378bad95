// SPDX-License-Identifier: Apache-2.0
#include "tdlchan/estimator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "tdlchan/errors.hpp"

namespace tdlchan::estimator {

namespace {

using cplx = std::complex<double>;

// Normalized pilot correlations: R = (A^H A)/N, bn = (A^H y)/N and
// py = |y|^2/N for the stacked shift-bank design A. Full-batch gradient
// descent only ever touches the data through these sums, so precomputing
// them reproduces the per-sample update exactly (up to FP summation order)
// at O(P^2) per epoch instead of O(N P).
struct NormalData {
    std::vector<cplx> R; // P x P row-major, Hermitian
    std::vector<cplx> bn;
    double py = 0.0;
    int P = 0;
};

// One correlation pass: for lag l*tau between transmitters (ma, mb), fills
// every Gram entry (ma, i), (mb, i-l) by snapshotting the running sum at the
// truncation point of each i.
void correlation_pass(const std::vector<cplx> &xa, const std::vector<cplx> &xb,
                      int ma, int mb, int l, int L, int tau,
                      std::vector<cplx> &G, int P) {
    const std::size_t n = xa.size();
    const std::size_t shift = static_cast<std::size_t>(l) * tau;
    const int width = L + 1;
    cplx acc{0.0, 0.0};
    int i = L;
    for (std::size_t k = 0; k + shift < n; ++k) {
        acc += std::conj(xa[k]) * xb[k + shift];
        while (i >= l && k == n - 1 - static_cast<std::size_t>(i) * tau) {
            const int p = ma * width + i;
            const int q = mb * width + (i - l);
            G[static_cast<std::size_t>(p) * P + q] = acc;
            --i;
        }
    }
}

NormalData build_normal_data(const TdlConfig &config,
                             const std::vector<signal::ComplexSignal> &tx_pilots,
                             const signal::ComplexSignal &rx_pilot) {
    const int L = config.num_taps;
    const int tau = config.tap_resolution;
    const int M = config.num_transmitters;
    const int width = L + 1;
    const std::size_t n = rx_pilot.samples.size();

    NormalData nd;
    nd.P = config.weight_count();
    nd.R.assign(static_cast<std::size_t>(nd.P) * nd.P, {0.0, 0.0});
    nd.bn.assign(static_cast<std::size_t>(nd.P), {0.0, 0.0});

    for (int ma = 0; ma < M; ++ma) {
        for (int mb = 0; mb < M; ++mb) {
            const int l_start = (ma <= mb) ? 0 : 1;
            for (int l = l_start; l <= L; ++l)
                correlation_pass(tx_pilots[ma].samples, tx_pilots[mb].samples,
                                 ma, mb, l, L, tau, nd.R, nd.P);
        }
    }
    // remaining entries by Hermitian symmetry
    for (int p = 0; p < nd.P; ++p) {
        const int ip = p % width;
        for (int q = 0; q < nd.P; ++q) {
            const int iq = q % width;
            const bool computed = ip > iq || (ip == iq && (p / width) <= (q / width));
            if (!computed)
                nd.R[static_cast<std::size_t>(p) * nd.P + q] =
                    std::conj(nd.R[static_cast<std::size_t>(q) * nd.P + p]);
        }
    }

    const auto &y = rx_pilot.samples;
    for (int m = 0; m < M; ++m) {
        const auto &x = tx_pilots[m].samples;
        for (int i = 0; i <= L; ++i) {
            const std::size_t shift = static_cast<std::size_t>(i) * tau;
            cplx acc{0.0, 0.0};
            for (std::size_t k = 0; k + shift < n; ++k)
                acc += std::conj(x[k]) * y[k + shift];
            nd.bn[static_cast<std::size_t>(m) * width + i] = acc;
        }
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto &v : nd.R)
        v *= inv_n;
    for (auto &v : nd.bn)
        v *= inv_n;
    nd.py = signal::mean_power(y);
    return nd;
}

void matvec(const std::vector<cplx> &R, const std::vector<cplx> &c,
            std::vector<cplx> &v, int P) {
    for (int p = 0; p < P; ++p) {
        cplx acc{0.0, 0.0};
        const cplx *row = R.data() + static_cast<std::size_t>(p) * P;
        for (int q = 0; q < P; ++q)
            acc += row[q] * c[q];
        v[p] = acc;
    }
}

void check_fit_inputs(const TdlConfig &config,
                      const std::vector<signal::ComplexSignal> &tx_pilots,
                      const signal::ComplexSignal &rx_pilot) {
    config.validate();
    if (tx_pilots.size() != static_cast<std::size_t>(config.num_transmitters))
        throw std::invalid_argument("fit: tx pilot count does not match num_transmitters");
    rx_pilot.validate();
    if (rx_pilot.samples.size() != config.block_size)
        throw std::invalid_argument("fit: rx pilot length does not match block_size");
    for (const auto &x : tx_pilots) {
        x.validate();
        if (x.samples.size() != config.block_size)
            throw std::invalid_argument("fit: tx pilot length does not match block_size");
    }
    if (static_cast<std::size_t>(config.num_taps) * config.tap_resolution >=
        config.block_size)
        throw std::invalid_argument("fit: L * tau must be smaller than the pilot length");
}

ChannelEstimate gradient_descent(const TdlConfig &config,
                                 const std::vector<signal::ComplexSignal> &tx_pilots,
                                 const signal::ComplexSignal &rx_pilot,
                                 const std::vector<cplx> *warm_start, int epochs) {
    const NormalData nd = build_normal_data(config, tx_pilots, rx_pilot);
    const int P = nd.P;
    const double step = 2.0 * config.learning_rate;

    ChannelEstimate est;
    est.config = config;
    est.weights.assign(static_cast<std::size_t>(P), {0.0, 0.0});
    if (warm_start)
        est.weights = *warm_start;
    est.loss_trace.reserve(static_cast<std::size_t>(epochs));

    std::vector<cplx> v(static_cast<std::size_t>(P));
    matvec(nd.R, est.weights, v, P);
    for (int e = 0; e < epochs; ++e) {
        for (int p = 0; p < P; ++p)
            est.weights[static_cast<std::size_t>(p)] -=
                step * (v[static_cast<std::size_t>(p)] - nd.bn[static_cast<std::size_t>(p)]);
        matvec(nd.R, est.weights, v, P);
        double loss = nd.py;
        for (int p = 0; p < P; ++p) {
            const cplx cw = std::conj(est.weights[static_cast<std::size_t>(p)]);
            loss += (cw * v[static_cast<std::size_t>(p)]).real() -
                    2.0 * (cw * nd.bn[static_cast<std::size_t>(p)]).real();
        }
        if (!std::isfinite(loss))
            throw divergence_error("fit: non-finite loss at epoch " + std::to_string(e + 1),
                                   e + 1);
        est.loss_trace.push_back(std::max(loss, 0.0));
    }
    return est;
}

} // namespace

void TdlConfig::validate() const {
    if (num_taps < 0)
        throw std::invalid_argument("TdlConfig: num_taps must be non-negative");
    if (tap_resolution < 1)
        throw std::invalid_argument("TdlConfig: tap_resolution must be >= 1");
    if (num_transmitters < 1)
        throw std::invalid_argument("TdlConfig: num_transmitters must be >= 1");
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("TdlConfig: learning_rate must be positive");
    if (epochs < 1)
        throw std::invalid_argument("TdlConfig: epochs must be >= 1");
    if (block_size == 0)
        throw std::invalid_argument("TdlConfig: block_size must be positive");
    if (prune_threshold && *prune_threshold < 0.0)
        throw std::invalid_argument("TdlConfig: prune_threshold must be non-negative");
}

std::vector<std::vector<cplx>> build_shift_bank(const signal::ComplexSignal &x, int L,
                                                int tau) {
    x.validate();
    if (L < 0 || tau < 1)
        throw std::invalid_argument("build_shift_bank: L must be >= 0 and tau >= 1");
    const std::size_t n = x.samples.size();
    if (static_cast<std::size_t>(L) * tau >= n)
        throw std::invalid_argument("build_shift_bank: L * tau must be smaller than the signal");

    std::vector<std::vector<cplx>> bank(static_cast<std::size_t>(L) + 1);
    for (int i = 0; i <= L; ++i) {
        auto &row = bank[static_cast<std::size_t>(i)];
        row.assign(n, {0.0, 0.0});
        const std::size_t shift = static_cast<std::size_t>(i) * tau;
        for (std::size_t k = shift; k < n; ++k)
            row[k] = x.samples[k - shift];
    }
    return bank;
}

ChannelEstimate fit(const TdlConfig &config,
                    const std::vector<signal::ComplexSignal> &tx_pilots,
                    const signal::ComplexSignal &rx_pilot) {
    check_fit_inputs(config, tx_pilots, rx_pilot);
    ChannelEstimate est = gradient_descent(config, tx_pilots, rx_pilot, nullptr,
                                           config.epochs);
    if (config.prune_threshold)
        est = prune(std::move(est), *config.prune_threshold);
    return est;
}

ChannelEstimate fit_ls_oracle(const std::vector<signal::ComplexSignal> &tx_pilots,
                              const signal::ComplexSignal &rx_pilot, int L, int tau) {
    if (tx_pilots.empty())
        throw std::invalid_argument("fit_ls_oracle: no transmit pilots");
    rx_pilot.validate();
    const std::size_t n = rx_pilot.samples.size();
    for (const auto &x : tx_pilots) {
        x.validate();
        if (x.samples.size() != n)
            throw std::invalid_argument("fit_ls_oracle: pilot lengths differ");
    }

    const int M = static_cast<int>(tx_pilots.size());
    const int width = L + 1;
    const int P = M * width;

    // Materialized design, straight inner products: intentionally the slow,
    // obviously-correct path (independent of fit's correlation machinery).
    std::vector<std::vector<cplx>> rows;
    rows.reserve(static_cast<std::size_t>(P));
    for (int m = 0; m < M; ++m) {
        auto bank = build_shift_bank(tx_pilots[static_cast<std::size_t>(m)], L, tau);
        for (auto &row : bank)
            rows.push_back(std::move(row));
    }

    Eigen::MatrixXcd G(P, P);
    Eigen::VectorXcd b(P);
    for (int p = 0; p < P; ++p) {
        for (int q = 0; q <= p; ++q) {
            cplx acc{0.0, 0.0};
            const auto &rp = rows[static_cast<std::size_t>(p)];
            const auto &rq = rows[static_cast<std::size_t>(q)];
            for (std::size_t k = 0; k < n; ++k)
                acc += std::conj(rp[k]) * rq[k];
            G(p, q) = acc;
            G(q, p) = std::conj(acc);
        }
        cplx acc{0.0, 0.0};
        const auto &rp = rows[static_cast<std::size_t>(p)];
        for (std::size_t k = 0; k < n; ++k)
            acc += std::conj(rp[k]) * rx_pilot.samples[k];
        b(p) = acc;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
    const Eigen::VectorXd evals = es.eigenvalues();
    const double lambda_max = evals(P - 1);
    const double lambda_min = evals(0);
    if (!(lambda_max > 0.0) || lambda_min <= lambda_max * 1e-13) {
        const double cond = lambda_min > 0.0 ? lambda_max / lambda_min
                                             : std::numeric_limits<double>::infinity();
        throw singularity_error("fit_ls_oracle: rank-deficient design, condition estimate " +
                                    std::to_string(cond),
                                cond);
    }
    const Eigen::VectorXcd c =
        es.eigenvectors() *
        (es.eigenvectors().adjoint() * b).cwiseQuotient(evals.cast<cplx>());

    ChannelEstimate est;
    est.config.num_taps = L;
    est.config.tap_resolution = tau;
    est.config.num_transmitters = M;
    est.config.block_size = n;
    est.weights.assign(static_cast<std::size_t>(P), {0.0, 0.0});
    for (int p = 0; p < P; ++p)
        est.weights[static_cast<std::size_t>(p)] = c(p);

    double residual = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        cplx yhat{0.0, 0.0};
        for (int p = 0; p < P; ++p)
            yhat += est.weights[static_cast<std::size_t>(p)] * rows[static_cast<std::size_t>(p)][k];
        residual += std::norm(rx_pilot.samples[k] - yhat);
    }
    est.loss_trace = {residual / static_cast<double>(n)};
    return est;
}

std::vector<ChannelEstimate> fit_sequence(const TdlConfig &config,
                                          const std::vector<PilotFrame> &frames) {
    if (frames.empty())
        throw std::invalid_argument("fit_sequence: no frames");
    const int warm_epochs = std::max(1, config.epochs / 10);

    std::vector<ChannelEstimate> estimates;
    estimates.reserve(frames.size());
    for (std::size_t k = 0; k < frames.size(); ++k) {
        check_fit_inputs(config, frames[k].tx_pilots, frames[k].rx_pilot);
        ChannelEstimate est =
            (k == 0) ? gradient_descent(config, frames[k].tx_pilots, frames[k].rx_pilot,
                                        nullptr, config.epochs)
                     : gradient_descent(config, frames[k].tx_pilots, frames[k].rx_pilot,
                                        &estimates.back().weights, warm_epochs);
        if (config.prune_threshold)
            est = prune(std::move(est), *config.prune_threshold);
        estimates.push_back(std::move(est));
    }
    return estimates;
}

ChannelEstimate prune(ChannelEstimate estimate, double threshold) {
    if (threshold < 0.0)
        throw std::invalid_argument("prune: threshold must be non-negative");
    for (auto &w : estimate.weights) {
        if (std::abs(w) < threshold)
            w = {0.0, 0.0};
    }
    return estimate;
}

double rmse(const ChannelEstimate &estimate, const std::vector<channel::TapSet> &truth) {
    const int M = estimate.config.num_transmitters;
    const int L = estimate.config.num_taps;
    const int tau = estimate.config.tap_resolution;
    if (truth.size() != static_cast<std::size_t>(M))
        throw std::invalid_argument("rmse: truth list must have one TapSet per transmitter");

    double acc = 0.0;
    for (int m = 0; m < M; ++m) {
        std::vector<cplx> dense(static_cast<std::size_t>(L) + 1, {0.0, 0.0});
        for (const auto &tap : truth[static_cast<std::size_t>(m)].taps) {
            if (tap.delay_samples % tau != 0 || tap.delay_samples > L * tau)
                throw std::invalid_argument(
                    "rmse: truth delay " + std::to_string(tap.delay_samples) +
                    " is not representable on the tap grid");
            dense[static_cast<std::size_t>(tap.delay_samples / tau)] = tap.gain;
        }
        for (int i = 0; i <= L; ++i)
            acc += std::norm(estimate.weight(m, i) - dense[static_cast<std::size_t>(i)]);
    }
    return std::sqrt(acc / static_cast<double>(estimate.config.weight_count()));
}

} // namespace tdlchan::estimator
