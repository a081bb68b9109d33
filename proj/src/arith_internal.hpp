#pragma once

#include <functional>
#include <optional>
#include <string>

#include "selfgraph/arith.hpp"

namespace selfgraph::arith::detail {

inline ExprPtr V(char v) { return ex::Var(v); }
inline ExprPtr N(long k) { return ex::Num(k); }
inline ExprPtr N(const mpz_class& k) { return ex::Num(k); }
inline ExprPtr Add(ExprPtr a, ExprPtr b) { return ex::Add(a, b); }
inline ExprPtr Sub(ExprPtr a, ExprPtr b) { return ex::Sub(a, b); }
inline ExprPtr Mul(ExprPtr a, ExprPtr b) { return ex::Mul(a, b); }
inline ExprPtr Pow(ExprPtr a, ExprPtr b) { return ex::Pow(a, b); }
inline ExprPtr Inc(ExprPtr a) { return ex::Add(a, N(1)); }

HintPtr MakeHint(std::string tag, std::function<HintResult(const Env&)> fn);

// Exactly one possible witness / none at all.
HintResult One(const mpz_class& v);
HintResult One(ValuePtr v);
HintResult NoWitness();

// Value of an expression when it is a natural number.
std::optional<mpz_class> Nat(const Expr& e, const Env& env);
std::optional<mpz_class> Nat(char v, const Env& env);

}  // namespace selfgraph::arith::detail
