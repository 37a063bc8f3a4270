#include "m2hs/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace m2hs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_size(int n) {
    if (!valid_grid_size(n))
        throw InvalidGridError("grid size must be a power of two >= 8, got " + std::to_string(n));
}

void check_same(int a, int b) {
    if (a != b)
        throw SizeMismatchError("grid size mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

// Signed wavenumber for FFT bin k of an n-point transform. The Nyquist bin is
// reported as 0 so odd spectral operators treat it symmetrically.
int signed_wavenumber(int k, int n) {
    if (2 * k < n) return k;
    if (2 * k == n) return 0;
    return k - n;
}

}  // namespace

bool valid_grid_size(int n) {
    return n >= 8 && (n & (n - 1)) == 0;
}

RealGridFunction::RealGridFunction(int n, double fill) : v_(static_cast<size_t>(n), fill) {
    check_size(n);
}

RealGridFunction::RealGridFunction(int n, std::vector<double> samples) : v_(std::move(samples)) {
    check_size(n);
    check_same(n, static_cast<int>(v_.size()));
}

bool RealGridFunction::all_finite() const {
    return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
}

ComplexGridFunction::ComplexGridFunction(int n, complex fill) : v_(static_cast<size_t>(n), fill) {
    check_size(n);
}

ComplexGridFunction::ComplexGridFunction(int n, std::vector<complex> samples) : v_(std::move(samples)) {
    check_size(n);
    check_same(n, static_cast<int>(v_.size()));
}

ComplexGridFunction::ComplexGridFunction(const RealGridFunction& re, const RealGridFunction& im)
    : v_(re.values().size()) {
    check_same(re.size(), im.size());
    for (int j = 0; j < re.size(); ++j) v_[j] = complex(re[j], im[j]);
}

ComplexGridFunction::ComplexGridFunction(const RealGridFunction& re) : v_(re.values().size()) {
    for (int j = 0; j < re.size(); ++j) v_[j] = complex(re[j], 0.0);
}

RealGridFunction ComplexGridFunction::real_part() const {
    RealGridFunction g(size());
    for (int j = 0; j < size(); ++j) g[j] = v_[j].real();
    return g;
}

RealGridFunction ComplexGridFunction::imag_part() const {
    RealGridFunction g(size());
    for (int j = 0; j < size(); ++j) g[j] = v_[j].imag();
    return g;
}

RealGridFunction ComplexGridFunction::abs2() const {
    RealGridFunction g(size());
    for (int j = 0; j < size(); ++j) g[j] = std::norm(v_[j]);
    return g;
}

bool ComplexGridFunction::all_finite() const {
    return std::all_of(v_.begin(), v_.end(), [](complex z) {
        return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
}

RealGridFunction operator+(const RealGridFunction& a, const RealGridFunction& b) {
    check_same(a.size(), b.size());
    RealGridFunction g(a.size());
    for (int j = 0; j < a.size(); ++j) g[j] = a[j] + b[j];
    return g;
}

RealGridFunction operator-(const RealGridFunction& a, const RealGridFunction& b) {
    check_same(a.size(), b.size());
    RealGridFunction g(a.size());
    for (int j = 0; j < a.size(); ++j) g[j] = a[j] - b[j];
    return g;
}

RealGridFunction operator*(const RealGridFunction& a, const RealGridFunction& b) {
    check_same(a.size(), b.size());
    RealGridFunction g(a.size());
    for (int j = 0; j < a.size(); ++j) g[j] = a[j] * b[j];
    return g;
}

RealGridFunction operator*(double c, const RealGridFunction& a) {
    RealGridFunction g(a.size());
    for (int j = 0; j < a.size(); ++j) g[j] = c * a[j];
    return g;
}

ComplexGridFunction operator+(const ComplexGridFunction& a, const ComplexGridFunction& b) {
    check_same(a.size(), b.size());
    ComplexGridFunction g(a.size());
    for (int j = 0; j < a.size(); ++j) g[j] = a[j] + b[j];
    return g;
}

ComplexGridFunction operator-(const ComplexGridFunction& a, const ComplexGridFunction& b) {
    check_same(a.size(), b.size());
    ComplexGridFunction g(a.size());
    for (int j = 0; j < a.size(); ++j) g[j] = a[j] - b[j];
    return g;
}

ComplexGridFunction operator*(complex c, const ComplexGridFunction& a) {
    ComplexGridFunction g(a.size());
    for (int j = 0; j < a.size(); ++j) g[j] = c * a[j];
    return g;
}

void fft(std::vector<complex>& a, bool inverse) {
    const int n = static_cast<int>(a.size());
    if (n == 0 || (n & (n - 1)) != 0)
        throw InvalidGridError("fft length must be a power of two");

    // bit reversal
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (int len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? kTwoPi : -kTwoPi) / len;
        const complex wl(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            complex w(1.0, 0.0);
            for (int j = 0; j < len / 2; ++j) {
                complex u = a[i + j];
                complex v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        for (auto& z : a) z /= static_cast<double>(n);
    }
}

namespace {

std::vector<complex> forward_spectrum(const ComplexGridFunction& f) {
    std::vector<complex> a = f.values();
    fft(a, false);
    return a;
}

ComplexGridFunction inverse_spectrum(std::vector<complex> a) {
    const int n = static_cast<int>(a.size());
    fft(a, true);
    return ComplexGridFunction(n, std::move(a));
}

}  // namespace

ComplexGridFunction differentiate(const ComplexGridFunction& f) {
    const int n = f.size();
    auto a = forward_spectrum(f);
    for (int k = 0; k < n; ++k) {
        const double kk = signed_wavenumber(k, n);
        a[k] *= complex(0.0, kTwoPi * kk);
    }
    return inverse_spectrum(std::move(a));
}

RealGridFunction differentiate(const RealGridFunction& f) {
    return differentiate(ComplexGridFunction(f)).real_part();
}

RampFunction antiderivative0(const RealGridFunction& f) {
    const int n = f.size();
    const double m = mean(f);
    auto a = forward_spectrum(ComplexGridFunction(f));
    a[0] = 0.0;  // mean handled by the slope
    for (int k = 1; k < n; ++k) {
        const double kk = signed_wavenumber(k, n);
        a[k] = (kk == 0.0) ? complex(0.0, 0.0) : a[k] / complex(0.0, kTwoPi * kk);
    }
    ComplexGridFunction F = inverse_spectrum(std::move(a));
    RealGridFunction periodic = F.real_part();
    const double at0 = periodic[0];
    for (int j = 0; j < n; ++j) periodic[j] -= at0;  // F(0) = 0
    return RampFunction{m, std::move(periodic)};
}

double quadrature(const RealGridFunction& f) {
    double s = 0.0;
    for (double x : f.values()) s += x;
    return s / f.size();
}

complex quadrature(const ComplexGridFunction& f) {
    complex s{0.0, 0.0};
    for (complex z : f.values()) s += z;
    return s / static_cast<double>(f.size());
}

double mean(const RealGridFunction& f) { return quadrature(f); }

complex hermitian_inner(const ComplexGridFunction& f, const ComplexGridFunction& g) {
    check_same(f.size(), g.size());
    complex s{0.0, 0.0};
    for (int j = 0; j < f.size(); ++j) s += std::conj(f[j]) * g[j];
    return s / static_cast<double>(f.size());
}

double l2_norm(const ComplexGridFunction& f) {
    return std::sqrt(std::max(0.0, hermitian_inner(f, f).real()));
}

double l2_norm(const RealGridFunction& f) {
    return std::sqrt(std::max(0.0, quadrature(f * f)));
}

TrigInterpolant::TrigInterpolant(const RealGridFunction& f)
    : TrigInterpolant(ComplexGridFunction(f)) {
    real_input_ = true;
}

TrigInterpolant::TrigInterpolant(const ComplexGridFunction& f) : n_(f.size()) {
    coeff_ = forward_spectrum(f);
    for (auto& c : coeff_) c /= static_cast<double>(n_);
}

complex TrigInterpolant::eval(double x) const {
    // sum over signed wavenumbers; the Nyquist coefficient rides on cos(pi n x)
    complex s{0.0, 0.0};
    const complex w = std::polar(1.0, kTwoPi * x);
    // k = 0..n/2-1
    complex wk{1.0, 0.0};
    for (int k = 0; k < n_ / 2; ++k) {
        s += coeff_[k] * wk;
        wk *= w;
    }
    // negative wavenumbers k = -n/2+1..-1, stored at bins n/2+1..n-1
    const complex winv = std::conj(w);
    complex wneg = winv;
    for (int k = 1; k < n_ / 2; ++k) {
        s += coeff_[n_ - k] * wneg;
        wneg *= winv;
    }
    // Nyquist bin
    s += coeff_[n_ / 2] * std::cos(std::numbers::pi * n_ * x);
    if (real_input_) return complex(s.real(), 0.0);
    return s;
}

double interp_eval(const RealGridFunction& f, double x) {
    return TrigInterpolant(f).eval(x).real();
}

complex interp_eval(const ComplexGridFunction& f, double x) {
    return TrigInterpolant(f).eval(x);
}

RealGridFunction RampFunction::derivative() const {
    RealGridFunction d = differentiate(periodic);
    for (int j = 0; j < d.size(); ++j) d[j] += slope;
    return d;
}

double RampFunction::value_at(double x) const {
    return slope * x + interp_eval(periodic, x);
}

ComplexGridFunction shift(const ComplexGridFunction& f, double a) {
    const int n = f.size();
    auto c = forward_spectrum(f);
    for (int k = 0; k < n; ++k) {
        const double kk = signed_wavenumber(k, n);
        c[k] *= std::polar(1.0, kTwoPi * kk * a);
    }
    return inverse_spectrum(std::move(c));
}

RealGridFunction shift(const RealGridFunction& f, double a) {
    return shift(ComplexGridFunction(f), a).real_part();
}

namespace {

// Safeguarded Newton for phi(x) = y on the bracket [lo, hi]; falls back to
// bisection whenever a Newton step leaves the bracket.
double solve_increasing(const TrigInterpolant& rem, const TrigInterpolant& rem_deriv, double y,
                        double lo, double hi) {
    auto phi = [&](double x) { return x + rem.eval_real(x); };
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 40; ++it) {
        const double r = phi(x) - y;
        if (r > 0.0)
            hi = x;
        else
            lo = x;
        if (std::abs(r) < 1e-14 || hi - lo < 1e-15) break;
        const double d = 1.0 + rem_deriv.eval_real(x);
        double next = d > 0.0 ? x - r / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        x = next;
    }
    return x;
}

void check_degree_one(const RampFunction& phi) {
    if (std::abs(phi.slope - 1.0) > 1e-12)
        throw InvalidGridError("circle map must have slope 1");
    if (std::abs(phi.periodic[0]) > 1e-10)
        throw InvalidGridError("circle map must satisfy phi(0) = 0");
}

}  // namespace

RampFunction invert_monotone(const RampFunction& phi, double eps_mono) {
    check_degree_one(phi);
    const int n = phi.size();
    const RealGridFunction dphi = phi.derivative();
    const double min_dphi = *std::min_element(dphi.values().begin(), dphi.values().end());
    if (min_dphi <= eps_mono)
        throw NonMonotoneError("min phi' = " + std::to_string(min_dphi) + " <= eps_mono");

    const TrigInterpolant rem(phi.periodic);
    const TrigInterpolant rem_deriv(differentiate(phi.periodic));

    // node values of phi are increasing; locate the bracketing node interval
    std::vector<double> phinode(static_cast<size_t>(n) + 1);
    for (int j = 0; j < n; ++j) phinode[j] = phi.node_value(j);
    phinode[n] = 1.0;

    RealGridFunction q(n);
    for (int j = 0; j < n; ++j) {
        const double y = static_cast<double>(j) / n;
        const auto it = std::upper_bound(phinode.begin(), phinode.end(), y);
        int m = static_cast<int>(it - phinode.begin()) - 1;
        m = std::clamp(m, 0, n - 1);
        const double x = solve_increasing(rem, rem_deriv, y, static_cast<double>(m) / n,
                                          static_cast<double>(m + 1) / n);
        q[j] = x - y;
    }
    return RampFunction{1.0, std::move(q)};
}

RampFunction invert_monotone_weak(const RampFunction& phi, double eps_mono) {
    check_degree_one(phi);
    const int n = phi.size();

    // Running-max node values; flats map to their left edge.
    std::vector<double> phinode(static_cast<size_t>(n) + 1);
    double run = 0.0;
    for (int j = 0; j < n; ++j) {
        run = std::max(run, phi.node_value(j));
        phinode[j] = run;
    }
    phinode[n] = std::max(run, 1.0);

    const TrigInterpolant rem(phi.periodic);
    const TrigInterpolant rem_deriv(differentiate(phi.periodic));
    const RealGridFunction dphi = phi.derivative();

    RealGridFunction q(n);
    for (int j = 0; j < n; ++j) {
        const double y = static_cast<double>(j) / n;
        const auto it = std::upper_bound(phinode.begin(), phinode.end(), y);
        int m = static_cast<int>(it - phinode.begin()) - 1;
        m = std::clamp(m, 0, n - 1);
        // retreat to the left edge of a flat run
        while (m > 0 && phinode[m] - phinode[m - 1] < 1e-13 && phinode[m] <= y + 1e-13) --m;
        double x;
        const double seg = phinode[m + 1] - phinode[m];
        if (seg < 1e-13) {
            x = static_cast<double>(m) / n;
        } else if (dphi[m] > eps_mono && (m + 1 == n || dphi[m + 1] > eps_mono)) {
            x = solve_increasing(rem, rem_deriv, y, static_cast<double>(m) / n,
                                 static_cast<double>(m + 1) / n);
        } else {
            x = (static_cast<double>(m) + (y - phinode[m]) / seg) / n;
        }
        q[j] = x - y;
    }
    return RampFunction{1.0, std::move(q)};
}

namespace {

UnwrappedPhase unwrap_impl(const ComplexGridFunction& f, double eps_zero, bool weak) {
    const int n = f.size();
    std::vector<double> raw(static_cast<size_t>(n));
    std::vector<bool> good(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double r = std::abs(f[j]);
        good[j] = r > eps_zero;
        raw[j] = good[j] ? std::arg(f[j]) : 0.0;
        if (!weak && !good[j])
            throw NearZeroError("|f| <= eps_zero at node " + std::to_string(j));
    }

    std::vector<double> theta(static_cast<size_t>(n));
    theta[0] = good[0] ? raw[0] : 0.0;
    double last_good = theta[0];
    for (int j = 1; j < n; ++j) {
        if (good[j]) {
            theta[j] = last_good + std::remainder(raw[j] - last_good, kTwoPi);
            last_good = theta[j];
        } else {
            theta[j] = last_good;
        }
    }
    // closing jump determines the winding
    const double closing = good[0] ? std::remainder(raw[0] - last_good, kTwoPi) : 0.0;
    const double total = (last_good + closing) - theta[0];
    const long winding = std::lround(total / kTwoPi);

    RealGridFunction remainder(n);
    for (int j = 0; j < n; ++j)
        remainder[j] = theta[j] - kTwoPi * winding * (static_cast<double>(j) / n);
    return UnwrappedPhase{RampFunction{kTwoPi * winding, std::move(remainder)}, winding};
}

}  // namespace

UnwrappedPhase unwrap_phase(const ComplexGridFunction& f, double eps_zero) {
    return unwrap_impl(f, eps_zero, false);
}

UnwrappedPhase unwrap_phase_weak(const ComplexGridFunction& f, double eps_zero) {
    return unwrap_impl(f, eps_zero, true);
}

}  // namespace m2hs
