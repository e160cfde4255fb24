#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rate.hpp"
#include "types.hpp"

namespace wflab {

//! One displacement atom of a finite jump measure.
struct JumpAtom
{
    Vector displacement;
    RateExpression rate;

    friend bool operator==(JumpAtom const& a, JumpAtom const& b)
    {
        return a.displacement.size() == b.displacement.size()
               && a.displacement == b.displacement && a.rate == b.rate;
    }
};

//---------------------------------------------------------------------------//
/*!
 * State-dependent jump measure mu(x, dz) = sum_j lambda_j(x) delta_{z_j}(dz).
 *
 * Only finite atomic kernels are represented. Density kernels must be
 * discretised into atoms by the caller. The rate bound is a user assertion
 * that every lambda_j(x) <= rate_bound; the simulator enforces it and the
 * hypothesis checker probes it.
 */
class JumpKernel
{
  public:
    JumpKernel(int dim, std::vector<JumpAtom> atoms, double rate_bound)
        : dim_{dim}, atoms_{std::move(atoms)}, rate_bound_{rate_bound}
    {
        if (dim_ < 1)
            throw ValidationError{"kernel dimension must be positive"};
        if (atoms_.empty())
            throw ValidationError{"kernel needs at least one atom"};
        if (!(rate_bound_ >= 0.0) || !std::isfinite(rate_bound_))
            throw ValidationError{"rate_bound must be finite and nonnegative"};
        bool any_nonzero = false;
        for (std::size_t j = 0; j < atoms_.size(); ++j)
        {
            auto const& atom = atoms_[j];
            if (atom.displacement.size() != dim_)
                throw ValidationError{"atom " + std::to_string(j)
                                      + " displacement has wrong dimension"};
            if (!atom.displacement.allFinite())
                throw ValidationError{"atom " + std::to_string(j)
                                      + " displacement is not finite"};
            auto arity = atom.rate.arity();
            if (arity != 0 && arity != dim_)
                throw ValidationError{"atom " + std::to_string(j)
                                      + " rate expression has wrong arity"};
            any_nonzero = any_nonzero || !atom.displacement.isZero(0.0);
        }
        if (!any_nonzero)
            throw ValidationError{"kernel needs an atom with nonzero jump"};
        state_independent_ = true;
        for (auto const& atom : atoms_)
            state_independent_ = state_independent_
                                 && atom.rate.is_state_independent();
    }

    int dim() const { return dim_; }
    std::size_t size() const { return atoms_.size(); }
    std::vector<JumpAtom> const& atoms() const { return atoms_; }
    JumpAtom const& atom(std::size_t j) const { return atoms_[j]; }
    double rate_bound() const { return rate_bound_; }
    bool is_state_independent() const { return state_independent_; }

    double rate(std::size_t j, Vector const& x) const
    {
        return atoms_[j].rate(x);
    }

    //! lambda_j(x) for all atoms.
    std::vector<double> rates(Vector const& x) const
    {
        std::vector<double> out(atoms_.size());
        for (std::size_t j = 0; j < atoms_.size(); ++j)
            out[j] = atoms_[j].rate(x);
        return out;
    }

    //! Compensator drift -sum_j lambda_j(x) z_j of the scaled process.
    Vector drift(Vector const& x) const
    {
        Vector v = Vector::Zero(dim_);
        for (auto const& atom : atoms_)
            v -= atom.rate(x) * atom.displacement;
        return v;
    }

    friend bool operator==(JumpKernel const& a, JumpKernel const& b)
    {
        return a.dim_ == b.dim_ && a.rate_bound_ == b.rate_bound_
               && a.atoms_ == b.atoms_;
    }

  private:
    int dim_;
    std::vector<JumpAtom> atoms_;
    double rate_bound_;
    bool state_independent_ = true;
};

struct HamiltonianDerivatives
{
    Vector gradient;
    Matrix hessian;
};

//---------------------------------------------------------------------------//
/*!
 * Hamiltonian H(x, .) with the state frozen.
 *
 * Rates are evaluated once at construction, after which H, its gradient and
 * Hessian in xi cost one exp per atom. Used by the conjugate solver, which
 * evaluates H many times at the same x.
 */
class FrozenHamiltonian
{
  public:
    FrozenHamiltonian(JumpKernel const& kernel,
                      Vector const& x,
                      double exponent_cap = kDefaultExponentCap)
        : kernel_{&kernel}, rates_{kernel.rates(x)}, cap_{exponent_cap}
    {
    }

    //! Same shape as a kernel but with explicit rates.
    FrozenHamiltonian(JumpKernel const& kernel,
                      std::vector<double> rates,
                      double exponent_cap = kDefaultExponentCap)
        : kernel_{&kernel}, rates_{std::move(rates)}, cap_{exponent_cap}
    {
    }

    int dim() const { return kernel_->dim(); }
    std::vector<double> const& rates() const { return rates_; }
    JumpKernel const& kernel() const { return *kernel_; }

    double operator()(Vector const& xi) const
    {
        double total = 0.0;
        for (std::size_t j = 0; j < rates_.size(); ++j)
        {
            if (rates_[j] == 0.0)
                continue;
            double u = kernel_->atom(j).displacement.dot(xi);
            check_exponent(j, u);
            total += rates_[j] * (std::expm1(u) - u);
        }
        return total;
    }

    //! H(xi), or nullopt if an exponent exceeds the cap.
    std::optional<double> try_value(Vector const& xi) const
    {
        double total = 0.0;
        for (std::size_t j = 0; j < rates_.size(); ++j)
        {
            if (rates_[j] == 0.0)
                continue;
            double u = kernel_->atom(j).displacement.dot(xi);
            if (u > cap_)
                return std::nullopt;
            total += rates_[j] * (std::expm1(u) - u);
        }
        return total;
    }

    Vector gradient(Vector const& xi) const
    {
        Vector g = Vector::Zero(dim());
        for (std::size_t j = 0; j < rates_.size(); ++j)
        {
            if (rates_[j] == 0.0)
                continue;
            auto const& z = kernel_->atom(j).displacement;
            double u = z.dot(xi);
            check_exponent(j, u);
            g += rates_[j] * std::expm1(u) * z;
        }
        return g;
    }

    HamiltonianDerivatives derivatives(Vector const& xi) const
    {
        HamiltonianDerivatives d{Vector::Zero(dim()),
                                 Matrix::Zero(dim(), dim())};
        for (std::size_t j = 0; j < rates_.size(); ++j)
        {
            if (rates_[j] == 0.0)
                continue;
            auto const& z = kernel_->atom(j).displacement;
            double u = z.dot(xi);
            check_exponent(j, u);
            d.gradient += rates_[j] * std::expm1(u) * z;
            d.hessian.noalias() += (rates_[j] * std::exp(u)) * z
                                   * z.transpose();
        }
        return d;
    }

  private:
    JumpKernel const* kernel_;
    std::vector<double> rates_;
    double cap_;

    void check_exponent(std::size_t j, double u) const
    {
        if (u > cap_)
            throw ExponentOverflow{j, u, cap_};
    }
};

//! H(x, xi) = sum_j lambda_j(x) (exp<z_j, xi> - 1 - <z_j, xi>)
inline double hamiltonian(JumpKernel const& kernel,
                          Vector const& x,
                          Vector const& xi,
                          double exponent_cap = kDefaultExponentCap)
{
    return FrozenHamiltonian{kernel, x, exponent_cap}(xi);
}

inline HamiltonianDerivatives
hamiltonian_derivatives(JumpKernel const& kernel,
                        Vector const& x,
                        Vector const& xi,
                        double exponent_cap = kDefaultExponentCap)
{
    return FrozenHamiltonian{kernel, x, exponent_cap}.derivatives(xi);
}

//---------------------------------------------------------------------------//
/*!
 * Uniform-in-x bound H_1(xi) >= H(x, xi).
 *
 * Represented as the Hamiltonian of a state-independent kernel with rates
 * sup_x lambda_j(x). Atoms whose rate is unbounded over R^d fall back to the
 * kernel's asserted rate bound.
 */
class DominatingHamiltonian
{
  public:
    explicit DominatingHamiltonian(JumpKernel const& kernel)
        : kernel_{dominating_kernel(kernel)}
    {
    }

    JumpKernel const& kernel() const { return kernel_; }

    double operator()(Vector const& xi,
                      double exponent_cap = kDefaultExponentCap) const
    {
        return hamiltonian(kernel_, Vector::Zero(kernel_.dim()), xi,
                           exponent_cap);
    }

    static JumpKernel dominating_kernel(JumpKernel const& kernel)
    {
        std::vector<JumpAtom> atoms;
        atoms.reserve(kernel.size());
        for (auto const& atom : kernel.atoms())
        {
            double bound = atom.rate.supremum().value_or(kernel.rate_bound());
            atoms.push_back({atom.displacement, RateExpression::constant(bound)});
        }
        return JumpKernel{kernel.dim(), std::move(atoms), kernel.rate_bound()};
    }

  private:
    JumpKernel kernel_;
};

}  // namespace wflab
