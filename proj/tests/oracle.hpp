#pragma once

// Independent 50-digit reimplementation of the closed-form constants, used
// only as a test oracle. Formulas are coded from scratch on top of
// boost::multiprecision and boost::math::tgamma, sharing nothing with the
// library beyond the input structs.

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

namespace oracle {

using HP = boost::multiprecision::cpp_dec_float_50;

inline HP pi() { return boost::math::constants::pi<HP>(); }
inline HP G(const HP& x) { return boost::math::tgamma(x); }
inline HP hp(double v) { return HP(v); }

inline HP S1(int n) {
    HP nn(n);
    return pow(G(1 + nn / 2), 1 / nn) / (sqrt(pi()) * nn);
}

inline HP S(const HP& q, int n) {
    HP nn(n);
    HP frac = (q - 1) / (nn - q);
    HP gam = G(1 + nn / 2) * G(nn) / (G(nn / q) * G(1 + nn - nn / q));
    return pow(frac, 1 - 1 / q) * pow(gam, 1 / nn) / (sqrt(pi()) * pow(nn, 1 / q));
}

inline HP K(const HP& q, int n) {
    HP nn(n);
    HP e = q - 1;
    HP gam = G(q * (nn - 1) / (2 * e)) / G((nn - 1) / (2 * e));
    return pow(pi(), (1 - q) / 2) * pow(e / (nn - q), e) * pow(gam, e / (nn - 1));
}

inline HP P(const HP& q, int n) {
    if (q == 1) {
        return 3 * S1(2);
    }
    HP nn(n);
    return S(q, n) * (1 + 2 * sqrt(nn) * q * sin(pi() / q) / (pow(q - 1, 1 / q) * pi()));
}

inline HP Cinf(const HP& p, int n, const HP& vol) {
    HP nn(n);
    HP omega = pow(pi(), nn / 2) / G(nn / 2 + 1);
    return pow(nn, -1 / p) * pow(omega, -1 / nn) * pow((p - 1) / (p - nn), (p - 1) / p) *
           pow(vol, 1 / nn - 1 / p);
}

inline HP lambda(const HP& B, const HP& p, int n) {
    return pow(HP(2), 3 * n * p) * pow(pow(B, 1 / p) + 1, p);
}

inline HP kappa(const HP& B, const HP& p, int n) {
    return (pow(HP(8), n) + 1) * lambda(B, p, n);
}

inline HP Z1(const HP& eps, const HP& ups, int n) {
    return 4 * pow(HP(2), n * (1 + eps / 2)) / (4 - (n + 2) * (ups - 1) * eps);
}

inline HP Z2(const HP& eps, const HP& ups, int n) {
    return ups * (4 + (n + 2) * eps) * pow(HP(2), n * (1 + eps / 2)) / (4 - (n + 2) * (ups - 1) * eps);
}

inline HP upsilon_generic(const HP& a, const HP& A, const HP& nu3, int n, const HP& c1, const HP& c2) {
    HP nn(n);
    HP Pq = P(2 * nn / (nn + 2), n);
    HP t = 2 * Pq * sqrt(2 / a) * sqrt(c1 * A * A / a + c2 + nu3 / 2) + 1;
    return (pow(HP(8), n) + 1) * pow(HP(2), 6 * n) * t * t;
}

inline HP upsilon_I(const HP& a, const HP& A, const HP& nu3, int n) {
    return upsilon_generic(a, A, nu3, n, 4, 1);
}

inline HP upsilon_U(const HP& a, const HP& A, const HP& nu3, int n) {
    return upsilon_generic(a, A, nu3, n, 8, 2);
}

inline HP upsilon(const HP& klo, const HP& khi, const HP& slo, const HP& shi) {
    HP ms = sqrt(4 * shi * shi + slo) / slo;
    HP mk = sqrt(4 * khi * khi + klo) / klo;
    HP m = ms > mk ? ms : mk;
    HP t = 6 * sqrt(HP(2)) * S1(2) * m + 1;
    return 65 * pow(HP(2), 12) * t * t;
}

struct Zcal3 {
    HP Z, Z1, Z2;
};

inline Zcal3 zcal(const HP& a, const HP& b, const HP& p, const HP& alpha, int n, const HP& vol,
                  const HP& bnd) {
    HP q = 2 * alpha / (alpha + 2);
    HP Z = pow(HP(2), (alpha * (p - 2) + 2 * p) / (alpha * (p - 2) - 2 * p)) *
           pow(vol + bnd, (alpha * (p - 2) - 2 * p) / (4 * p * alpha)) * (S(q, n) + K(q, n));
    HP Z1 = (pow(vol, 1 / (2 * alpha)) / a + 1 / sqrt(a * b)) * pow(vol, (p - 2) / (4 * p)) * Z;
    HP Z2 = (1 / b + pow(vol, 1 / (2 * alpha)) / sqrt(a * b)) * Z;
    return {Z, Z1, Z2};
}

struct SmallIn {
    double k_lo, k_hi, s_lo, s_hi, a_s, b_lo, b_hi, g_hi;
    double p, ell, alpha;
    double vol, bnd, gam, r;
    double th_ell, th_lp;
};

struct SmallOut {
    HP ups, Cinf, M1, M2, M3, M4, M5, M6, Zc1, Zc2;
    HP Q(const SmallIn& in, const HP& R) const;
};

inline SmallOut small(const SmallIn& in) {
    SmallOut o;
    HP p(in.p), ell(in.ell), vol(in.vol), r(in.r);
    HP klo(in.k_lo), slo(in.s_lo), shi(in.s_hi), as(in.a_s), blo(in.b_lo), ghi(in.g_hi);
    o.ups = upsilon(klo, HP(in.k_hi), slo, shi);
    o.Cinf = Cinf(p, 2, vol);
    auto z = zcal(klo, blo, p, HP(in.alpha), 2, vol, HP(in.bnd));
    o.Zc1 = z.Z1;
    o.Zc2 = z.Z2;
    HP D = pow(p - 1 - o.ups * (p - 2), 1 / p);
    HP f5 = pow(HP(5), 1 / p);
    HP rp = pow(r, 2 / p - 1);
    HP pprime = p / (p - 1);
    HP K2p = K(2 * p / (2 * p - 1), 2);
    HP A1 = pow(1 + o.ups * (p - 1), 1 / p);
    HP A2 = pow(pow(HP(2), 3 * (p - 2) / 2) + o.ups * (p - 1), 1 / p);
    HP c = 2 * sqrt(HP(2)) * f5;
    o.M1 = c * (pow(vol, 1 / (2 * pprime)) * K2p * rp + A1 * sqrt(1 + slo)) / (D * slo);
    o.M2 = c * shi * as * (pow(vol, HP(0.5) - 1 / p) * rp + A2 * sqrt(1 + slo)) / (D * slo);
    HP ellp = ell / (ell - 1);
    o.M3 = 2 * f5 * pow(HP(2), 2 - 3 / p) * rp * pow(ghi, ellp / 2) * pow(blo, -1 / (2 * (ell - 1))) /
           (D * sqrt(klo));
    o.M4 = 2 * f5 * A1 * sqrt(2 / klo + 1) / (D * sqrt(klo));
    o.M5 = c * (rp * pow(vol, HP(0.5) - 1 / p) + A2 * sqrt(1 + klo)) / (D * klo);
    o.M6 = as * (1 + o.M1 + o.M2) + (o.M1 + o.M2) * (o.M1 + o.M2);
    return o;
}

inline HP SmallOut::Q(const SmallIn& in, const HP& R) const {
    HP p(in.p), ell(in.ell), te(in.th_ell), tl(in.th_lp), ghi(in.g_hi), blo(in.b_lo), bhi(in.b_hi);
    HP ellp = ell / (ell - 1);
    HP tlm = pow(tl, ell - 1);
    HP front = pow(HP(2), ell - 2) * bhi * M4 * pow(HP(in.gam), 1 / p);
    HP sC = HP(in.s_hi) * Cinf;
    HP sum = M3 * pow(te, ell / 2) + M4 * ghi * tlm + pow(ghi / blo, 1 / (ell - 1)) * te;
    sum += front * pow(1 + Zc2 * ghi * tlm, ell - 1);
    sum += front * pow(Zc1 * sC * M6, ell - 1) * pow(R, 2 * (ell - 1));
    sum += pow(ellp * pow(HP(in.vol), 1 - 2 / p) / (2 * blo * HP(in.k_lo)), 1 / ell) * pow(sC * M6, 2 / ell) *
           pow(R, 4 / ell);
    sum += sC * M5 * M6 * R * R;
    return sum;
}

inline double rel(double got, const HP& want) {
    HP w = want;
    HP d = abs(HP(got) - w) / abs(w);
    return d.convert_to<double>();
}

} // namespace oracle
