#include "kdenoise/domain.hpp"

#include "kdenoise/error.hpp"

#include <cmath>

namespace kdenoise {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidDomain, what);
}

}  // namespace

std::string domain_name(const DomainSpec& domain) {
  return std::visit(Overloaded{
                        [](const BoundedLength&) { return std::string("bounded-length"); },
                        [](const LengthSdRatio&) { return std::string("ratio"); },
                        [](const BoundedCurvature&) { return std::string("curvature"); },
                        [](const Subspace&) { return std::string("subspace"); },
                        [](const DiscreteSupport&) { return std::string("discrete"); },
                        [](const MonotonePenalty&) { return std::string("monotone"); },
                    },
                    domain);
}

void validate_domain(const DomainSpec& domain, std::size_t dim) {
  std::visit(Overloaded{
                 [](const BoundedLength& d) {
                   require(d.m >= 1, "bounded-length: m must be >= 1");
                   require(d.bound >= 0.0 && !std::isnan(d.bound),
                           "bounded-length: bound must be >= 0");
                 },
                 [](const LengthSdRatio& d) {
                   require(d.m >= 2, "ratio: m must be >= 2");
                   require(d.bound >= 0.0 && !std::isnan(d.bound), "ratio: bound must be >= 0");
                 },
                 [](const BoundedCurvature& d) {
                   require(d.m >= 2, "curvature: m must be >= 2");
                   require(d.curvature_penalty >= 0.0 && !std::isnan(d.curvature_penalty),
                           "curvature: penalty must be >= 0");
                 },
                 [dim](const Subspace& d) {
                   require(d.subspace_dim >= 1 && d.subspace_dim <= dim,
                           "subspace: dimension must lie in [1, d]");
                 },
                 [](const DiscreteSupport& d) {
                   require(d.m >= 1, "discrete: m must be >= 1");
                   if (d.fixed_weights) {
                     const Vector& w = *d.fixed_weights;
                     require(static_cast<std::size_t>(w.size()) == d.m,
                             "discrete: fixed weights must have length m");
                     require(w.allFinite() && w.minCoeff() >= 0.0,
                             "discrete: fixed weights must be nonnegative");
                     require(std::abs(w.sum() - 1.0) <= 1e-12, "discrete: fixed weights must sum to 1");
                   }
                 },
                 [dim](const MonotonePenalty& d) {
                   require(d.m >= 1, "monotone: m must be >= 1");
                   require(dim == 2, "monotone: data must be planar");
                   require(d.penalty_weight >= 0.0 && std::isfinite(d.penalty_weight),
                           "monotone: penalty weight must be finite and >= 0");
                 },
             },
             domain);
}

}  // namespace kdenoise
