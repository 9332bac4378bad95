// SPDX-License-Identifier: Apache-2.0
#include "tdlchan/baselines.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "tdlchan/errors.hpp"

namespace tdlchan::baselines {

namespace {

using cplx = std::complex<double>;

// FFTW plan creation is not thread-safe; execution of a created plan is.
std::mutex fftw_plan_mutex;

std::vector<cplx> dft(const std::vector<cplx> &in, int sign) {
    const std::size_t n = in.size();
    std::vector<cplx> out(n);
    // std::complex<double> is layout-compatible with fftw_complex
    auto *in_ptr = reinterpret_cast<fftw_complex *>(const_cast<cplx *>(in.data()));
    auto *out_ptr = reinterpret_cast<fftw_complex *>(out.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex);
        plan = fftw_plan_dft_1d(static_cast<int>(n), in_ptr, out_ptr, sign,
                                FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex);
        fftw_destroy_plan(plan);
    }
    return out;
}

} // namespace

CsiVector csi_frequency_ls(const signal::ComplexSignal &tx_pilot,
                           const signal::ComplexSignal &rx_pilot, double eps) {
    tx_pilot.validate();
    rx_pilot.validate();
    if (tx_pilot.samples.size() != rx_pilot.samples.size())
        throw std::invalid_argument("csi_frequency_ls: pilot lengths differ");
    if (tx_pilot.samples.size() < 2)
        throw std::invalid_argument("csi_frequency_ls: need at least 2 samples");

    const std::size_t n = tx_pilot.samples.size();
    const auto X = dft(tx_pilot.samples, FFTW_FORWARD);
    const auto Y = dft(rx_pilot.samples, FFTW_FORWARD);

    std::vector<cplx> H(n);
    for (std::size_t k = 0; k < n; ++k)
        H[k] = Y[k] * std::conj(X[k]) / (std::norm(X[k]) + eps);

    CsiVector out;
    out.regularization_eps = eps;
    out.impulse_response = dft(H, FFTW_BACKWARD);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto &h : out.impulse_response)
        h *= inv_n;
    return out;
}

AdaptiveResult lms_estimate(const signal::ComplexSignal &tx_pilot,
                            const signal::ComplexSignal &rx_pilot, int L,
                            double step_mu) {
    tx_pilot.validate();
    rx_pilot.validate();
    if (tx_pilot.samples.size() != rx_pilot.samples.size())
        throw std::invalid_argument("lms_estimate: pilot lengths differ");
    if (!(step_mu > 0.0))
        throw std::invalid_argument("lms_estimate: step_mu must be positive");
    if (L < 0 || static_cast<std::size_t>(L) >= tx_pilot.samples.size())
        throw std::invalid_argument("lms_estimate: L must satisfy 0 <= L < N");

    const auto &x = tx_pilot.samples;
    const auto &y = rx_pilot.samples;
    const std::size_t n = x.size();
    const std::size_t width = static_cast<std::size_t>(L) + 1;

    AdaptiveResult result;
    result.weights.assign(width, {0.0, 0.0});
    result.error_trace.reserve(n);

    for (std::size_t t = 0; t < n; ++t) {
        cplx yhat{0.0, 0.0};
        const std::size_t lags = std::min(width, t + 1);
        for (std::size_t i = 0; i < lags; ++i)
            yhat += result.weights[i] * x[t - i];
        const cplx err = y[t] - yhat;
        for (std::size_t i = 0; i < lags; ++i)
            result.weights[i] += step_mu * std::conj(x[t - i]) * err;
        const double e2 = std::norm(err);
        if (!std::isfinite(e2))
            throw divergence_error("lms_estimate: non-finite error at sample " +
                                       std::to_string(t),
                                   static_cast<long>(t));
        result.error_trace.push_back(e2);
    }
    return result;
}

AdaptiveResult rls_estimate(const signal::ComplexSignal &tx_pilot,
                            const signal::ComplexSignal &rx_pilot, int L,
                            double forgetting_lambda, double delta) {
    tx_pilot.validate();
    rx_pilot.validate();
    if (tx_pilot.samples.size() != rx_pilot.samples.size())
        throw std::invalid_argument("rls_estimate: pilot lengths differ");
    if (!(forgetting_lambda > 0.0) || forgetting_lambda > 1.0)
        throw std::invalid_argument("rls_estimate: lambda must be in (0, 1]");
    if (!(delta > 0.0))
        throw std::invalid_argument("rls_estimate: delta must be positive");
    if (L < 0 || static_cast<std::size_t>(L) >= tx_pilot.samples.size())
        throw std::invalid_argument("rls_estimate: L must satisfy 0 <= L < N");

    const auto &x = tx_pilot.samples;
    const auto &y = rx_pilot.samples;
    const std::size_t n = x.size();
    const std::size_t width = static_cast<std::size_t>(L) + 1;
    const double inv_lambda = 1.0 / forgetting_lambda;

    AdaptiveResult result;
    result.weights.assign(width, {0.0, 0.0});
    result.error_trace.reserve(n);

    // P tracks the inverse of the exponentially weighted regressor
    // correlation sum; regressor u_t(i) = x[t-i], prediction = w^T u.
    std::vector<cplx> P(width * width, {0.0, 0.0});
    for (std::size_t i = 0; i < width; ++i)
        P[i * width + i] = {1.0 / delta, 0.0};

    std::vector<cplx> u(width), pu(width), gain(width);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t i = 0; i < width; ++i)
            u[i] = (i <= t) ? x[t - i] : cplx{0.0, 0.0};

        // pu = P * conj(u)
        for (std::size_t r = 0; r < width; ++r) {
            cplx acc{0.0, 0.0};
            for (std::size_t c2 = 0; c2 < width; ++c2)
                acc += P[r * width + c2] * std::conj(u[c2]);
            pu[r] = acc;
        }
        cplx denom{forgetting_lambda, 0.0};
        for (std::size_t i = 0; i < width; ++i)
            denom += u[i] * pu[i]; // u^T P conj(u), real for Hermitian P
        for (std::size_t i = 0; i < width; ++i)
            gain[i] = pu[i] / denom;

        cplx yhat{0.0, 0.0};
        for (std::size_t i = 0; i < width; ++i)
            yhat += result.weights[i] * u[i];
        const cplx err = y[t] - yhat;
        for (std::size_t i = 0; i < width; ++i)
            result.weights[i] += gain[i] * err;

        // P <- (P - gain * u^T P) / lambda; pu is reused to hold u^T P
        for (std::size_t r = 0; r < width; ++r) {
            cplx utp{0.0, 0.0};
            for (std::size_t c2 = 0; c2 < width; ++c2)
                utp += u[c2] * P[c2 * width + r];
            pu[r] = utp;
        }
        for (std::size_t r = 0; r < width; ++r)
            for (std::size_t c2 = 0; c2 < width; ++c2)
                P[r * width + c2] = (P[r * width + c2] - gain[r] * pu[c2]) * inv_lambda;

        const double e2 = std::norm(err);
        if (!std::isfinite(e2))
            throw divergence_error("rls_estimate: non-finite error at sample " +
                                       std::to_string(t),
                                   static_cast<long>(t));
        result.error_trace.push_back(e2);
    }
    return result;
}

} // namespace tdlchan::baselines
