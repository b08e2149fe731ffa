#pragma once

#include <doctest.h>

#include <variant>

#include "costlam/overloaded.hpp"
#include "costlam/syntax.hpp"

namespace costlam::test {

inline ParseOptions reserved_ok() {
  ParseOptions o;
  o.allow_reserved = true;
  return o;
}

inline src::Term S(const char* text) { return parse_source(text, reserved_ok()); }
inline cps::Term C(const char* text) { return parse_cps(text, reserved_ok()); }
inline vn::Term V(const char* text) { return parse_vn(text, reserved_ok()); }
inline Type T(const char* text) { return parse_type(text, reserved_ok()); }

template <class V, class... Fs>
decltype(auto) visit_node(const V& v, Fs&&... fs) {
  return std::visit(overloaded{std::forward<Fs>(fs)...}, v);
}

}  // namespace costlam::test
