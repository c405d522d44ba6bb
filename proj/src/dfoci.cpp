#include "reprel/dfoci.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace reprel::dfoci {

namespace {

bool is_word_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

enum class TokKind {
  Word,
  LBrace,
  RBrace,
  LParen,
  RParen,
  Comma,
  Colon,
  Slash,
  Tilde,
  ArrowSame,
  ArrowNext,
  End,
};

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  int line = 0;
  int column = 0;
};

class Lexer {
 public:
  Lexer(std::string_view text, std::string_view filename)
      : text_(text), file_(filename) {}

  Token next() {
    skip_trivia();
    Token tok;
    tok.line = line_;
    tok.column = column_;
    if (pos_ >= text_.size()) {
      tok.kind = TokKind::End;
      return tok;
    }
    char c = text_[pos_];
    switch (c) {
      case '{': return single(tok, TokKind::LBrace);
      case '}': return single(tok, TokKind::RBrace);
      case '(': return single(tok, TokKind::LParen);
      case ')': return single(tok, TokKind::RParen);
      case ',': return single(tok, TokKind::Comma);
      case ':': return single(tok, TokKind::Colon);
      case '/': return single(tok, TokKind::Slash);
      case '~': return single(tok, TokKind::Tilde);
      default: break;
    }
    if (c == '-') return lex_arrow(tok);
    if (is_word_start(c) || std::isdigit(static_cast<unsigned char>(c))) {
      return lex_word(tok);
    }
    fail(tok, std::string("unexpected character '") + c + "'");
  }

  [[noreturn]] void fail(const Token& at, const std::string& message) const {
    throw ParseError(std::string(file_), at.line, at.column, message);
  }

 private:
  Token& single(Token& tok, TokKind kind) {
    tok.kind = kind;
    tok.text = text_[pos_];
    advance();
    return tok;
  }

  Token lex_arrow(Token& tok) {
    // "->" or "-+1->"
    advance();  // consume '-'
    if (pos_ < text_.size() && text_[pos_] == '>') {
      advance();
      tok.kind = TokKind::ArrowSame;
      tok.text = "->";
      return tok;
    }
    if (pos_ + 2 < text_.size() && text_.substr(pos_, 3) == "+1-" &&
        pos_ + 3 < text_.size() && text_[pos_ + 3] == '>') {
      advance();
      advance();
      advance();
      advance();
      tok.kind = TokKind::ArrowNext;
      tok.text = "-+1->";
      return tok;
    }
    fail(tok, "expected '->' or '-+1->'");
  }

  Token lex_word(Token& tok) {
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (is_word_char(c)) {
        advance();
        continue;
      }
      // A hyphen continues the identifier only when followed by another
      // identifier character; otherwise it starts an arrow.
      if (c == '-' && pos_ + 1 < text_.size() && is_word_char(text_[pos_ + 1])) {
        advance();
        advance();
        continue;
      }
      break;
    }
    tok.kind = TokKind::Word;
    tok.text = std::string(text_.substr(start, pos_ - start));
    return tok;
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::string_view file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

class Parser {
 public:
  Parser(std::string_view text, std::string_view filename)
      : lexer_(text, filename), file_(filename) {
    cur_ = lexer_.next();
    ahead_ = lexer_.next();
  }

  DomainDecl parse() {
    DomainDecl decl;
    while (cur_.kind != TokKind::End) {
      if (cur_.kind == TokKind::LBrace) {
        decl.statements.push_back(parse_statement(std::nullopt));
      } else if (cur_.kind == TokKind::Word) {
        // A word followed by '(' or ':' opens a scoped statement; anything
        // else must be a declaration keyword.
        if (ahead_.kind == TokKind::LParen || ahead_.kind == TokKind::Colon) {
          Atom head = parse_head();
          expect(TokKind::Colon, "expected ':' after sub-task head");
          decl.statements.push_back(parse_statement(head));
        } else {
          parse_decl(decl);
        }
      } else {
        fail("expected declaration or statement");
      }
    }
    return decl;
  }

 private:
  void parse_decl(DomainDecl& decl) {
    Token kw = expect(TokKind::Word, "expected 'predicate' or 'subtask'");
    bool is_pred = kw.text == "predicate";
    if (!is_pred && kw.text != "subtask") {
      lexer_.fail(kw, "expected 'predicate' or 'subtask', got '" + kw.text + "'");
    }
    Token name = expect(TokKind::Word, "expected declared name");
    expect(TokKind::Slash, "expected '/' before arity");
    Token arity_tok = expect(TokKind::Word, "expected arity");
    int arity = parse_nat(arity_tok);
    auto& table = is_pred ? decl.predicates : decl.subtasks;
    auto [it, inserted] = table.emplace(name.text, arity);
    if (!inserted && it->second != arity) {
      lexer_.fail(name, "conflicting redeclaration of " + name.text + ": arity " +
                            std::to_string(it->second) + " vs " +
                            std::to_string(arity));
    }
  }

  int parse_nat(const Token& tok) {
    for (char c : tok.text) {
      if (!std::isdigit(static_cast<unsigned char>(c))) {
        lexer_.fail(tok, "expected a natural number, got '" + tok.text + "'");
      }
    }
    return std::stoi(tok.text);
  }

  Atom parse_head() {
    Token name = expect(TokKind::Word, "expected sub-task name");
    Atom head;
    head.predicate = name.text;
    if (cur_.kind != TokKind::LParen) return head;  // zero-arity sub-task
    consume();
    while (true) {
      Token var = expect(TokKind::Word, "expected parameter variable");
      if (!is_variable_name(var.text)) {
        lexer_.fail(var, "sub-task parameters must be variables (uppercase): '" +
                             var.text + "'");
      }
      head.args.push_back(Term::var(var.text));
      if (cur_.kind == TokKind::Comma) {
        consume();
        continue;
      }
      break;
    }
    expect(TokKind::RParen, "expected ')' after parameters");
    return head;
  }

  Statement parse_statement(std::optional<Atom> head) {
    Statement stmt;
    stmt.subtask = std::move(head);
    stmt.line = cur_.line;
    expect(TokKind::LBrace, "expected '{'");
    while (true) {
      stmt.antecedent.push_back(parse_item());
      if (cur_.kind == TokKind::Comma) {
        consume();
        continue;
      }
      break;
    }
    expect(TokKind::RBrace, "expected '}' after antecedent items");
    if (cur_.kind == TokKind::ArrowSame) {
      stmt.next_step = false;
    } else if (cur_.kind == TokKind::ArrowNext) {
      stmt.next_step = true;
    } else {
      fail("expected '->' or '-+1->'");
    }
    consume();
    stmt.consequent = parse_item();
    stmt.normalize();
    return stmt;
  }

  VocabItem parse_item() {
    bool negative = false;
    if (cur_.kind == TokKind::Tilde) {
      consume();
      negative = true;
    }
    Token name = expect(TokKind::Word, "expected literal, 'A', 'R' or 'Ro'");
    bool has_args = cur_.kind == TokKind::LParen;
    if (!negative && !has_args) {
      if (name.text == kActionName) return VocabItem::action();
      if (name.text == kTaskRewardName) return VocabItem::task_reward();
      if (name.text == kOptionRewardName) return VocabItem::option_reward();
    }
    Literal lit;
    lit.positive = !negative;
    lit.atom.predicate = name.text;
    if (has_args) {
      consume();
      while (true) {
        Token term = expect(TokKind::Word, "expected term");
        lit.atom.args.push_back(make_term(term.text));
        if (cur_.kind == TokKind::Comma) {
          consume();
          continue;
        }
        break;
      }
      expect(TokKind::RParen, "expected ')' after terms");
    }
    return VocabItem::state_literal(std::move(lit));
  }

  Token expect(TokKind kind, const std::string& message) {
    if (cur_.kind != kind) fail(message);
    Token tok = cur_;
    consume();
    return tok;
  }

  void consume() {
    cur_ = ahead_;
    ahead_ = lexer_.next();
  }

  [[noreturn]] void fail(const std::string& message) {
    std::string got = cur_.kind == TokKind::End ? "end of input" : "'" + cur_.text + "'";
    lexer_.fail(cur_, message + ", got " + got);
  }

  Lexer lexer_;
  std::string_view file_;
  Token cur_;
  Token ahead_;
};

}  // namespace

std::string VocabItem::str() const {
  switch (kind) {
    case ItemKind::Action: return std::string(kActionName);
    case ItemKind::TaskReward: return std::string(kTaskRewardName);
    case ItemKind::OptionReward: return std::string(kOptionRewardName);
    case ItemKind::StateLiteral: return literal.str();
  }
  return {};
}

void Statement::normalize() {
  // Canonical antecedent order: descending lexicographic on the printed form.
  std::sort(antecedent.begin(), antecedent.end(),
            [](const VocabItem& a, const VocabItem& b) { return b.str() < a.str(); });
  antecedent.erase(std::unique(antecedent.begin(), antecedent.end()),
                   antecedent.end());
}

DomainDecl parse_domain(std::string_view text, std::string_view filename) {
  return Parser(text, filename).parse();
}

std::string print_statement(const Statement& stmt) {
  std::string out;
  if (stmt.subtask) {
    out += stmt.subtask->str();
    out += ": ";
  }
  out += '{';
  for (std::size_t i = 0; i < stmt.antecedent.size(); ++i) {
    if (i > 0) out += ", ";
    out += stmt.antecedent[i].str();
  }
  out += '}';
  out += stmt.next_step ? " -+1-> " : " -> ";
  out += stmt.consequent.str();
  return out;
}

std::string print_domain(const DomainDecl& decl) {
  std::string out;
  for (const auto& [name, arity] : decl.predicates) {
    out += "predicate " + name + "/" + std::to_string(arity) + "\n";
  }
  for (const auto& [name, arity] : decl.subtasks) {
    out += "subtask " + name + "/" + std::to_string(arity) + "\n";
  }
  for (const Statement& stmt : decl.statements) {
    out += print_statement(stmt) + "\n";
  }
  return out;
}

namespace {

bool reserved_name(const std::string& name) {
  return name == kActionName || name == kTaskRewardName || name == kOptionRewardName;
}

void check_literal(const DomainDecl& decl, const Literal& lit, int index, int line,
                   std::vector<Diagnostic>& out) {
  const std::string& pred = lit.atom.predicate;
  if (reserved_name(pred)) {
    out.push_back({index, line, "reserved name used as predicate: " + pred});
    return;
  }
  auto it = decl.predicates.find(pred);
  if (it == decl.predicates.end()) {
    out.push_back({index, line, "undeclared predicate: " + pred});
    return;
  }
  if (it->second != static_cast<int>(lit.atom.args.size())) {
    out.push_back({index, line,
                   "arity mismatch for " + pred + ": declared /" +
                       std::to_string(it->second) + ", used with " +
                       std::to_string(lit.atom.args.size()) + " args"});
  }
}

}  // namespace

std::vector<Diagnostic> validate(const DomainDecl& decl) {
  std::vector<Diagnostic> out;
  for (const auto& [name, arity] : decl.predicates) {
    (void)arity;
    if (reserved_name(name)) {
      out.push_back({-1, 0, "reserved name declared as predicate: " + name});
    }
    if (decl.subtasks.count(name)) {
      out.push_back({-1, 0, "name declared as both predicate and subtask: " + name});
    }
  }
  for (const auto& [name, arity] : decl.subtasks) {
    (void)arity;
    if (reserved_name(name)) {
      out.push_back({-1, 0, "reserved name declared as subtask: " + name});
    }
  }
  for (std::size_t i = 0; i < decl.statements.size(); ++i) {
    const Statement& stmt = decl.statements[i];
    int index = static_cast<int>(i);
    if (stmt.subtask) {
      const Atom& head = *stmt.subtask;
      auto it = decl.subtasks.find(head.predicate);
      if (it == decl.subtasks.end()) {
        out.push_back({index, stmt.line, "undeclared subtask: " + head.predicate});
      } else if (it->second != static_cast<int>(head.args.size())) {
        out.push_back({index, stmt.line,
                       "arity mismatch for subtask " + head.predicate +
                           ": declared /" + std::to_string(it->second) +
                           ", used with " + std::to_string(head.args.size()) +
                           " args"});
      }
      std::set<std::string> seen;
      for (const Term& t : head.args) {
        if (!seen.insert(t.name).second) {
          out.push_back({index, stmt.line,
                         "repeated parameter in subtask head: " + t.name});
        }
      }
    }
    for (const VocabItem& item : stmt.antecedent) {
      if (item.kind == ItemKind::StateLiteral) {
        check_literal(decl, item.literal, index, stmt.line, out);
      }
    }
    if (stmt.consequent.kind == ItemKind::Action) {
      out.push_back({index, stmt.line, "consequent may not be the action variable A"});
    } else if (stmt.consequent.kind == ItemKind::StateLiteral) {
      check_literal(decl, stmt.consequent.literal, index, stmt.line, out);
      if (!stmt.next_step) {
        out.push_back({index, stmt.line,
                       "same-step influence must target R or Ro, not " +
                           stmt.consequent.literal.str()});
      }
    }
  }
  return out;
}

DomainDecl load_domain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, 0, "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  DomainDecl decl = parse_domain(text, path);
  std::vector<Diagnostic> diags = validate(decl);
  if (!diags.empty()) {
    throw ParseError(path, diags.front().line, 1, diags.front().message);
  }
  return decl;
}

}  // namespace reprel::dfoci
