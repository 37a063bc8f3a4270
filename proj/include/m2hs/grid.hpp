#ifndef M2HS_GRID_HPP
#define M2HS_GRID_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace m2hs {

using complex = std::complex<double>;

struct SizeMismatchError : std::runtime_error {
    explicit SizeMismatchError(const std::string& what) : std::runtime_error(what) {}
};
struct NonMonotoneError : std::runtime_error {
    explicit NonMonotoneError(const std::string& what) : std::runtime_error(what) {}
};
struct NearZeroError : std::runtime_error {
    explicit NearZeroError(const std::string& what) : std::runtime_error(what) {}
};
struct InvalidGridError : std::runtime_error {
    explicit InvalidGridError(const std::string& what) : std::runtime_error(what) {}
};

// Tolerances below which a map is treated as boundary/weak data.
inline constexpr double kEpsMono = 1e-8;
inline constexpr double kEpsZero = 1e-10;

bool valid_grid_size(int n);  // power of two, n >= 8

/// Periodic real function on S^1 = R/Z sampled at x_j = j/n.
class RealGridFunction {
  public:
    RealGridFunction() = default;
    explicit RealGridFunction(int n, double fill = 0.0);
    RealGridFunction(int n, std::vector<double> samples);

    template <typename F>
    static RealGridFunction sample(int n, F&& f) {
        RealGridFunction g(n);
        for (int j = 0; j < n; ++j) g.v_[j] = f(static_cast<double>(j) / n);
        return g;
    }

    int size() const { return static_cast<int>(v_.size()); }
    double node(int j) const { return static_cast<double>(j) / size(); }
    double operator[](int j) const { return v_[j]; }
    double& operator[](int j) { return v_[j]; }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }

    bool all_finite() const;

  private:
    std::vector<double> v_;
};

/// Periodic complex function on S^1 sampled at x_j = j/n.
class ComplexGridFunction {
  public:
    ComplexGridFunction() = default;
    explicit ComplexGridFunction(int n, complex fill = {0.0, 0.0});
    ComplexGridFunction(int n, std::vector<complex> samples);
    ComplexGridFunction(const RealGridFunction& re, const RealGridFunction& im);
    explicit ComplexGridFunction(const RealGridFunction& re);

    template <typename F>
    static ComplexGridFunction sample(int n, F&& f) {
        ComplexGridFunction g(n);
        for (int j = 0; j < n; ++j) g.v_[j] = f(static_cast<double>(j) / n);
        return g;
    }

    int size() const { return static_cast<int>(v_.size()); }
    double node(int j) const { return static_cast<double>(j) / size(); }
    complex operator[](int j) const { return v_[j]; }
    complex& operator[](int j) { return v_[j]; }
    const std::vector<complex>& values() const { return v_; }
    std::vector<complex>& values() { return v_; }

    RealGridFunction real_part() const;
    RealGridFunction imag_part() const;
    RealGridFunction abs2() const;

    bool all_finite() const;

  private:
    std::vector<complex> v_;
};

// Pointwise arithmetic; sizes must match.
RealGridFunction operator+(const RealGridFunction& a, const RealGridFunction& b);
RealGridFunction operator-(const RealGridFunction& a, const RealGridFunction& b);
RealGridFunction operator*(const RealGridFunction& a, const RealGridFunction& b);
RealGridFunction operator*(double c, const RealGridFunction& a);
ComplexGridFunction operator+(const ComplexGridFunction& a, const ComplexGridFunction& b);
ComplexGridFunction operator-(const ComplexGridFunction& a, const ComplexGridFunction& b);
ComplexGridFunction operator*(complex c, const ComplexGridFunction& a);

/// f(x) = slope*x + periodic(x); the representation used for maps with a
/// linear part (antiderivatives of nonzero-mean data, phi, tau, unwrapped
/// phases) so that spectral calculus applies to the remainder.
struct RampFunction {
    double slope = 0.0;
    RealGridFunction periodic;

    int size() const { return periodic.size(); }
    double node_value(int j) const { return slope * periodic.node(j) + periodic[j]; }
    RealGridFunction derivative() const;
    double value_at(double x) const;  // trig interpolation of the remainder
};

struct UnwrappedPhase {
    RampFunction theta;  // theta.slope = 2*pi*winding
    long winding = 0;
};

// Spectral calculus. Exact for band-limited inputs with bandwidth < n/2;
// the Nyquist mode is given zero derivative (node-exact for real data).
RealGridFunction differentiate(const RealGridFunction& f);
ComplexGridFunction differentiate(const ComplexGridFunction& f);

/// Antiderivative with F(0) = 0; the mean of f becomes the slope of the result.
RampFunction antiderivative0(const RealGridFunction& f);

double quadrature(const RealGridFunction& f);  // (1/n) sum f(x_j)
complex quadrature(const ComplexGridFunction& f);
double mean(const RealGridFunction& f);

/// <f,g> = quadrature(conj(f) * g). Re is the round metric pairing,
/// Im the d(alpha) pairing.
complex hermitian_inner(const ComplexGridFunction& f, const ComplexGridFunction& g);
double l2_norm(const ComplexGridFunction& f);
double l2_norm(const RealGridFunction& f);

double interp_eval(const RealGridFunction& f, double x);
complex interp_eval(const ComplexGridFunction& f, double x);

/// Precomputed spectrum for repeated trigonometric evaluation.
class TrigInterpolant {
  public:
    explicit TrigInterpolant(const RealGridFunction& f);
    explicit TrigInterpolant(const ComplexGridFunction& f);
    complex eval(double x) const;
    double eval_real(double x) const { return eval(x).real(); }

  private:
    std::vector<complex> coeff_;  // coeff_[k] for wavenumber k - n/2 shifted layout
    int n_ = 0;
    bool real_input_ = false;
};

/// Circular shift: g(x) = f(x + a), computed spectrally.
RealGridFunction shift(const RealGridFunction& f, double a);
ComplexGridFunction shift(const ComplexGridFunction& f, double a);

/// Inverse of a strictly increasing degree-one circle map phi(x) = x + r(x),
/// phi(0)=0, phi(1)=1. Returns psi with phi(psi(y)) = y to ~1e-12.
/// Throws NonMonotoneError when min phi' <= eps_mono (blow-up regime).
RampFunction invert_monotone(const RampFunction& phi, double eps_mono = kEpsMono);

/// Inverse of a nondecreasing degree-one map: flats collapse to single
/// Eulerian points and preimages on flats are taken from the left edge.
RampFunction invert_monotone_weak(const RampFunction& phi, double eps_mono = kEpsMono);

/// Continuous argument theta with f = |f| e^{i theta}, theta(0) in (-pi, pi].
/// Throws NearZeroError when min |f| <= eps_zero.
UnwrappedPhase unwrap_phase(const ComplexGridFunction& f, double eps_zero = kEpsZero);

/// Weak variant: nodes with |f| <= eps_zero inherit the phase of the nearest
/// good node on the left (a.e. semantics).
UnwrappedPhase unwrap_phase_weak(const ComplexGridFunction& f, double eps_zero = kEpsZero);

// In-place radix-2 FFT; n must be a power of two. inverse=true applies 1/n.
void fft(std::vector<complex>& a, bool inverse);

}  // namespace m2hs

#endif
