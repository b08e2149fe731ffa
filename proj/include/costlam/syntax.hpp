#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "costlam/cps.hpp"
#include "costlam/region.hpp"
#include "costlam/source.hpp"
#include "costlam/types.hpp"
#include "costlam/vn.hpp"

namespace costlam {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column)
      : std::runtime_error(what), line(line), column(column) {}
  int line;
  int column;
};

struct ParseOptions {
  // Accept names with the '_' prefix; used when re-reading printed output.
  bool allow_reserved = false;
};

src::Term parse_source(std::string_view text, ParseOptions opts = {});
cps::Term parse_cps(std::string_view text, ParseOptions opts = {});
vn::Term parse_vn(std::string_view text, ParseOptions opts = {});
HoistProgram parse_hoist(std::string_view text, ParseOptions opts = {});
rgn::Program parse_region(std::string_view text, ParseOptions opts = {});
Type parse_type(std::string_view text, ParseOptions opts = {});
rgn::Type parse_region_type(std::string_view text, ParseOptions opts = {});

// Input files may open with `assume x : A;` declarations.
struct SourceInput {
  TypeCtx ctx;
  src::Term term;
};
struct CpsInput {
  TypeCtx ctx;
  cps::Term term;
};
struct VnInput {
  TypeCtx ctx;
  vn::Term term;
};
struct RegionInput {
  rgn::TypeCtx ctx;
  rgn::Program program;
};
SourceInput parse_source_input(std::string_view text, ParseOptions opts = {});
CpsInput parse_cps_input(std::string_view text, ParseOptions opts = {});
VnInput parse_vn_input(std::string_view text, ParseOptions opts = {});
RegionInput parse_region_input(std::string_view text, ParseOptions opts = {});

std::string print(const src::Term& t);
std::string print(const cps::Term& t);
std::string print(const cps::Value& v);
std::string print(const vn::Term& t);
std::string print(const HoistProgram& p);
std::string print(const rgn::Term& t);
std::string print(const rgn::Program& p);
std::string print(const Type& t);
std::string print(const rgn::Type& t);
std::string print(const TypeCtx& ctx);
std::string print(const rgn::TypeCtx& ctx);

}  // namespace costlam
