#pragma once

#include <cmath>
#include <complex>

namespace vshp {

// Complex per-unit quantity in the synchronously rotating network frame.
// Wraps a plain (re, im) pair so domain signatures stay readable; converts
// to std::complex<double> where dense linear algebra takes over.
struct Phasor {
  double re = 0.0;
  double im = 0.0;

  constexpr Phasor() = default;
  constexpr Phasor(double r, double i) : re(r), im(i) {}

  static Phasor polar(double mag, double angle_rad) {
    return {mag * std::cos(angle_rad), mag * std::sin(angle_rad)};
  }
  static Phasor from(std::complex<double> z) { return {z.real(), z.imag()}; }

  std::complex<double> c() const { return {re, im}; }

  double mag2() const { return re * re + im * im; }
  double mag() const { return std::hypot(re, im); }
  double angle() const { return std::atan2(im, re); }

  Phasor conj() const { return {re, -im}; }

  // Multiplication by e^{j*angle}.
  Phasor rotated(double angle_rad) const {
    const double c = std::cos(angle_rad);
    const double s = std::sin(angle_rad);
    return {re * c - im * s, re * s + im * c};
  }

  Phasor operator-() const { return {-re, -im}; }
  Phasor& operator+=(Phasor o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Phasor& operator-=(Phasor o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
};

inline Phasor operator+(Phasor a, Phasor b) { return {a.re + b.re, a.im + b.im}; }
inline Phasor operator-(Phasor a, Phasor b) { return {a.re - b.re, a.im - b.im}; }
inline Phasor operator*(Phasor a, Phasor b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline Phasor operator*(double s, Phasor a) { return {s * a.re, s * a.im}; }
inline Phasor operator*(Phasor a, double s) { return s * a; }
inline Phasor operator/(Phasor a, double s) { return {a.re / s, a.im / s}; }
inline Phasor operator/(Phasor a, Phasor b) {
  const double d = b.mag2();
  return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}

// Complex power V * conj(I), generator convention.
inline Phasor apparent_power(Phasor v, Phasor i) { return v * i.conj(); }

}  // namespace vshp
