#pragma once

#include <span>
#include <string>
#include <vector>

namespace rfs {

/**
 * Even, uniformly convex edge potential with declared curvature bounds
 * c_minus <= V'' <= c_plus. Built-in families:
 *   quadratic(k):      V(x) = k x^2 / 2
 *   quad_plus_sqrt(k): V(x) = x^2 / 2 + k sqrt(1 + x^2)
 * plus a tabulated potential for experiments (derivatives by differences;
 * convexity of a table is checked, not assumed).
 */
class Potential {
  public:
    struct Eval {
        double v, dv, ddv;
    };

    static Potential quadratic(double kappa);
    static Potential quad_plus_sqrt(double kappa);
    static Potential table(std::vector<double> x, std::vector<double> v);
    /** parse "quadratic:1.0" / "qsqrt:0.5" */
    static Potential parse(const std::string& tag);

    double c_minus() const { return c_minus_; }
    double c_plus() const { return c_plus_; }
    const std::string& name() const { return name_; }

    Eval eval(double x) const;
    double value(double x) const { return eval(x).v; }
    double prime(double x) const { return eval(x).dv; }
    double second(double x) const { return eval(x).ddv; }

    /** same shape with V, V', V'' (and the curvature bounds) scaled by s */
    Potential scaled(double s) const;

  private:
    enum class Kind { Quadratic, QuadPlusSqrt, Table };
    Kind kind_ = Kind::Quadratic;
    double kappa_ = 1.0;
    double scale_ = 1.0;
    double c_minus_ = 1.0, c_plus_ = 1.0;
    std::string name_ = "quadratic:1";
    std::vector<double> tx_, tv_;  // table nodes
};

struct EllipticityReport {
    double c_minus = 0.0, c_plus = 0.0;
    // worst slack of the declared bounds over the probe grid; negative = violated
    double product_lower = 0.0;    // min of V'(x) x - c_minus x^2
    double product_upper = 0.0;    // min of c_plus x^2 - V'(x) x
    double curvature_lower = 0.0;  // min of V''(x) - c_minus
    double curvature_upper = 0.0;  // min of c_plus - V''(x)
    double evenness = 0.0;         // max |V(x) - V(-x)|
    bool ok(double tol = 1e-9) const {
        return product_lower >= -tol && product_upper >= -tol &&
               curvature_lower >= -tol && curvature_upper >= -tol && evenness <= tol;
    }
};

EllipticityReport check_ellipticity(const Potential& pot, std::span<const double> grid);
EllipticityReport check_ellipticity(const Potential& pot, double x_max = 16.0, int n = 4097);

}  // namespace rfs
