#ifndef XNLG_SERIALIZATION_HPP
#define XNLG_SERIALIZATION_HPP

#include <string>
#include <string_view>
#include <variant>

#include "xnlg/games.hpp"
#include "xnlg/sdp.hpp"
#include "xnlg/strategies.hpp"

namespace xnlg::serialization {

// IEEE-754 double rendered with 17 significant digits; parsing the result
// recovers the identical bit pattern, except that negative zero is
// normalized to "0".
std::string format_double(double v);

using LoadedGame = std::variant<games::ExtendedNonlocalGame, games::MonogamyGame>;

// Canonical schema-1 JSON: fixed field order, entries sorted by question and
// answer indices, zero extended-game pay-offs omitted. Serializing a loaded
// canonical file reproduces it byte for byte.
std::string to_json(const games::ExtendedNonlocalGame& g);
std::string to_json(const games::MonogamyGame& g);
std::string to_json(const strategies::Strategy& s);

// Structural parse of either game type. Throws DomainError naming the
// offending field (BudgetError for oversized tables); semantic validation is
// games::validate's job.
LoadedGame game_from_json(std::string_view text);
strategies::Strategy strategy_from_json(std::string_view text);

// Sparse block text export over the real embedding of each block:
// F_i = emb(A_i), c_i = 2 b_i, F_0 = emb(C)/2, so the exported problem's
// optimal value equals the engine problem's. Header lines: constraint
// count, block count, embedded block dimensions, right-hand sides; body:
// one "constraint block row col value" line per nonzero upper-triangle
// entry, 1-indexed, constraint 0 being F_0.
std::string export_sdp_text(const sdp::SdpProblem& p);

}  // namespace xnlg::serialization

#endif
