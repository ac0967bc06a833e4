#include "draftiv/formula.hpp"

#include <cctype>

namespace draftiv {

std::string to_string(FactorKind f) {
  switch (f) {
    case FactorKind::Athlete: return "athlete";
    case FactorKind::Event: return "event";
    case FactorKind::Group: return "group";
    case FactorKind::EventGroup: return "eventgroup";
  }
  return "?";
}

void FormulaSpec::validate() const {
  if (endogenous.has_value() != !instruments.empty())
    throw std::invalid_argument(
        "formula must have an endogenous term iff it has instruments: " + text);
  if (response.empty()) throw std::invalid_argument("formula has no response");
}

namespace {

struct Token {
  enum Kind { Ident, Number, Symbol, End } kind = End;
  std::string value;
  int line = 1;
  int column = 1;
  double number = 0.0;
};

class Scanner {
 public:
  explicit Scanner(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw FormulaError(msg, current_.line, current_.column);
  }

  Token expect_ident(const std::string& what) {
    if (current_.kind != Token::Ident) fail("expected " + what);
    return take();
  }

  void expect_symbol(const std::string& sym) {
    if (current_.kind != Token::Symbol || current_.value != sym)
      fail("expected '" + sym + "'");
    take();
  }

  bool accept_symbol(const std::string& sym) {
    if (current_.kind == Token::Symbol && current_.value == sym) {
      take();
      return true;
    }
    return false;
  }

 private:
  void advance() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++col_;
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
    current_ = Token{};
    current_.line = line_;
    current_.column = col_;
    if (pos_ >= text_.size()) {
      current_.kind = Token::End;
      return;
    }
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      current_.kind = Token::Ident;
      current_.value = text_.substr(start, pos_ - start);
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
              text_[pos_] == 'e' || text_[pos_] == 'E' ||
              ((text_[pos_] == '+' || text_[pos_] == '-') && pos_ > start &&
               (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
        ++pos_;
      current_.kind = Token::Number;
      current_.value = text_.substr(start, pos_ - start);
      try {
        current_.number = std::stod(current_.value);
      } catch (const std::exception&) {
        throw FormulaError("bad number '" + current_.value + "'", line_, col_);
      }
    } else {
      current_.kind = Token::Symbol;
      // Two-character comparison operators.
      if ((c == '<' || c == '>' || c == '=' || c == '!') && pos_ + 1 < text_.size() &&
          text_[pos_ + 1] == '=') {
        current_.value = text_.substr(pos_, 2);
        pos_ += 2;
      } else {
        current_.value = std::string(1, c);
        ++pos_;
      }
    }
    col_ += static_cast<int>(current_.value.size());
  }

  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token current_;
};

FactorKind parse_factor(Scanner& sc) {
  Token t = sc.expect_ident("a factor name (athlete, event, group, eventgroup)");
  if (t.value == "athlete") return FactorKind::Athlete;
  if (t.value == "event") return FactorKind::Event;
  if (t.value == "group" || t.value == "cluster") return FactorKind::Group;
  if (t.value == "eventgroup") return FactorKind::EventGroup;
  throw FormulaError("unknown factor '" + t.value + "'", t.line, t.column);
}

int expect_integer(Scanner& sc) {
  if (sc.peek().kind != Token::Number) sc.fail("expected an integer");
  Token t = sc.take();
  return static_cast<int>(t.number);
}

void parse_filter_items(Scanner& sc, FormulaSpec& spec) {
  for (;;) {
    Token t = sc.expect_ident("a filter item");
    if (t.value == "groupsize") {
      if (sc.peek().kind != Token::Symbol)
        sc.fail("expected a comparison after 'groupsize'");
      std::string op = sc.take().value;
      int value = expect_integer(sc);
      spec.filters.group_size = GroupSizePredicate::parse(op + std::to_string(value));
    } else if (t.value == "rankcap") {
      sc.expect_symbol("=");
      spec.outcome.rank_cap = static_cast<double>(expect_integer(sc));
    } else if (t.value == "dcap") {
      sc.expect_symbol("=");
      spec.filters.position_cap = expect_integer(sc);
    } else if (t.value == "band") {
      sc.expect_symbol("=");
      // band=1-2:3-4, scanned as number/symbol tokens
      auto read_band_number = [&]() { return expect_integer(sc); };
      Band low, high;
      low.lo = read_band_number();
      sc.expect_symbol("-");
      low.hi = read_band_number();
      sc.expect_symbol(":");
      high.lo = read_band_number();
      sc.expect_symbol("-");
      high.hi = read_band_number();
      BandPair pair{low, high};
      band_treatment(low.lo, pair);  // validates disjointness
      spec.filters.band = pair;
    } else if (t.value == "noleader") {
      spec.filters.drop_leader_term = true;
    } else {
      throw FormulaError("unknown filter '" + t.value + "'", t.line, t.column);
    }
    if (!sc.accept_symbol(",")) break;
  }
}

void parse_outcome(Scanner& sc, FormulaSpec& spec) {
  Token t = sc.expect_ident("an outcome mode (logrank, centered, raw)");
  spec.outcome.explicit_mode = true;
  if (t.value == "logrank") {
    spec.outcome.mode = OutcomeMode::LogRankPlus1;
  } else if (t.value == "centered") {
    spec.outcome.mode = OutcomeMode::CenteredLog;
  } else if (t.value == "raw") {
    spec.outcome.mode = OutcomeMode::Raw;
  } else {
    throw FormulaError("unknown outcome mode '" + t.value + "'", t.line, t.column);
  }
  while (sc.peek().kind == Token::Ident) {
    Token kv = sc.take();
    if (kv.value == "shift") {
      sc.expect_symbol("=");
      if (sc.peek().kind != Token::Number) sc.fail("expected a number after shift=");
      spec.outcome.shift_c = sc.take().number;
    } else if (kv.value == "rankcap") {
      sc.expect_symbol("=");
      spec.outcome.rank_cap = static_cast<double>(expect_integer(sc));
    } else {
      throw FormulaError("unknown outcome option '" + kv.value + "'", kv.line, kv.column);
    }
  }
}

}  // namespace

FormulaSpec parse_formula(const std::string& text) {
  FormulaSpec spec;
  spec.text = text;
  Scanner sc(text);

  spec.response = sc.expect_ident("a response column").value;
  sc.expect_symbol("~");

  // Regressor terms; "1" stands for an empty list (FE-only right-hand side).
  if (sc.peek().kind == Token::Number && sc.peek().value == "1") {
    sc.take();
  } else {
    for (;;) {
      Token a = sc.expect_ident("a regressor");
      Term term{a.value, ""};
      if (sc.accept_symbol(":")) term.b = sc.expect_ident("an interaction column").value;
      spec.terms.push_back(term);
      if (!sc.accept_symbol("+")) break;
    }
  }

  while (sc.accept_symbol("|")) {
    Token head = sc.expect_ident("a clause (fe, iv, cluster, filter, outcome)");
    sc.expect_symbol(":");
    if (head.value == "fe") {
      while (sc.peek().kind == Token::Ident) spec.absorb.push_back(parse_factor(sc));
      if (spec.absorb.empty()) sc.fail("fe: needs at least one factor");
    } else if (head.value == "iv") {
      Token endog = sc.expect_ident("an endogenous column");
      spec.endogenous = endog.value;
      sc.expect_symbol("~");
      for (;;) {
        spec.instruments.push_back(sc.expect_ident("an instrument column").value);
        if (!sc.accept_symbol("+")) break;
      }
    } else if (head.value == "cluster") {
      while (sc.peek().kind == Token::Ident) spec.cluster.push_back(parse_factor(sc));
      if (spec.cluster.empty()) sc.fail("cluster: needs at least one factor");
    } else if (head.value == "filter") {
      parse_filter_items(sc, spec);
    } else if (head.value == "outcome") {
      parse_outcome(sc, spec);
    } else {
      throw FormulaError("unknown clause '" + head.value + "'", head.line, head.column);
    }
  }
  if (sc.peek().kind != Token::End) sc.fail("unexpected trailing input");

  spec.validate();
  return spec;
}

}  // namespace draftiv
