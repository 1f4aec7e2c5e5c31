#include "mgrisk/milp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace mgrisk {

int MilpModel::add_variable(std::string name, VarKind kind, double lower, double upper) {
    variables_.push_back({std::move(name), kind, lower, upper});
    return static_cast<int>(variables_.size()) - 1;
}

int MilpModel::add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs) {
    for (const auto& term : terms)
        if (term.var < 0 || term.var >= num_variables())
            throw ModelError("constraint '" + name + "' references undeclared variable " +
                             std::to_string(term.var));
    constraints_.push_back({std::move(name), std::move(terms), sense, rhs});
    return static_cast<int>(constraints_.size()) - 1;
}

void MilpModel::set_objective(std::vector<Term> terms, double constant) {
    for (const auto& term : terms)
        if (term.var < 0 || term.var >= num_variables())
            throw ModelError("objective references undeclared variable " + std::to_string(term.var));
    objective_ = std::move(terms);
    objective_constant_ = constant;
}

void MilpModel::add_objective_term(int var, double coef) {
    if (var < 0 || var >= num_variables())
        throw ModelError("objective references undeclared variable " + std::to_string(var));
    objective_.push_back({var, coef});
}

void MilpModel::set_bounds(int var, double lower, double upper) {
    if (var < 0 || var >= num_variables()) throw ModelError("set_bounds: bad variable index");
    variables_[static_cast<std::size_t>(var)].lower = lower;
    variables_[static_cast<std::size_t>(var)].upper = upper;
}

int MilpModel::num_binaries() const {
    return static_cast<int>(std::count_if(variables_.begin(), variables_.end(),
                                          [](const Variable& v) { return v.kind == VarKind::Binary; }));
}

int MilpModel::find_variable(const std::string& name) const {
    for (std::size_t j = 0; j < variables_.size(); ++j)
        if (variables_[j].name == name) return static_cast<int>(j);
    return -1;
}

std::vector<double> MilpModel::objective_vector() const {
    std::vector<double> c(variables_.size(), 0.0);
    for (const auto& term : objective_) c[static_cast<std::size_t>(term.var)] += term.coef;
    return c;
}

double MilpModel::evaluate_objective(const std::vector<double>& values) const {
    double sum = objective_constant_;
    for (const auto& term : objective_) sum += term.coef * values[static_cast<std::size_t>(term.var)];
    return sum;
}

void MilpModel::validate() const {
    for (const auto& v : variables_) {
        if (std::isnan(v.lower) || std::isnan(v.upper))
            throw ModelError("variable '" + v.name + "' has NaN bounds");
        if (v.lower > v.upper)
            throw ModelError("variable '" + v.name + "' has lower > upper");
        if (v.kind == VarKind::Binary) {
            auto in01 = [](double x) { return x == 0.0 || x == 1.0; };
            if (!in01(v.lower) || !in01(v.upper))
                throw ModelError("binary variable '" + v.name + "' must have bounds in {0,1}");
        }
    }
    for (const auto& row : constraints_) {
        if (!std::isfinite(row.rhs)) throw ModelError("constraint '" + row.name + "' has non-finite rhs");
        for (const auto& term : row.terms) {
            if (term.var < 0 || term.var >= num_variables())
                throw ModelError("constraint '" + row.name + "' references undeclared variable");
            if (!std::isfinite(term.coef))
                throw ModelError("constraint '" + row.name + "' has non-finite coefficient");
        }
    }
    for (const auto& term : objective_)
        if (term.var < 0 || term.var >= num_variables() || !std::isfinite(term.coef))
            throw ModelError("objective term is invalid");
}

double row_activity(const Constraint& row, const std::vector<double>& values) {
    double sum = 0.0;
    for (const auto& term : row.terms) sum += term.coef * values[static_cast<std::size_t>(term.var)];
    return sum;
}

std::string format_double(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, end);
}

// ---------------------------------------------------------------------------
// LP writer

namespace {

void write_expression(std::ostream& os, const MilpModel& model, const std::vector<Term>& terms,
                      std::size_t indent) {
    std::size_t on_line = 0;
    bool first = true;
    for (const auto& term : terms) {
        if (on_line == 8) {
            os << "\n" << std::string(indent, ' ');
            on_line = 0;
        }
        const double c = term.coef;
        if (first)
            os << (c < 0 ? "- " : "");
        else
            os << (c < 0 ? " - " : " + ");
        os << format_double(std::abs(c)) << ' ' << model.variables()[static_cast<std::size_t>(term.var)].name;
        first = false;
        ++on_line;
    }
    if (first) os << "0";
}

const char* sense_token(Sense s) {
    switch (s) {
    case Sense::LessEqual: return "<=";
    case Sense::Equal: return "=";
    case Sense::GreaterEqual: return ">=";
    }
    return "=";
}

} // namespace

void write_lp(const MilpModel& model, std::ostream& os) {
    os << "\\ mgrisk LP export: " << model.num_variables() << " variables, "
       << model.num_constraints() << " constraints\n";
    os << "Minimize\n obj: ";
    write_expression(os, model, model.objective(), 2);
    if (model.objective_constant() != 0.0)
        os << (model.objective_constant() < 0 ? " - " : " + ")
           << format_double(std::abs(model.objective_constant()));
    os << "\nSubject To\n";
    for (const auto& row : model.constraints()) {
        os << ' ' << row.name << ": ";
        write_expression(os, model, row.terms, 2);
        os << ' ' << sense_token(row.sense) << ' ' << format_double(row.rhs) << '\n';
    }
    os << "Bounds\n";
    for (const auto& v : model.variables()) {
        if (std::isinf(v.lower) && v.lower < 0 && std::isinf(v.upper) && v.upper > 0)
            os << ' ' << v.name << " free\n";
        else if (v.lower == v.upper)
            os << ' ' << v.name << " = " << format_double(v.lower) << '\n';
        else
            os << ' ' << format_double(v.lower) << " <= " << v.name << " <= "
               << format_double(v.upper) << '\n';
    }
    bool any_binary = false;
    std::size_t on_line = 0;
    for (const auto& v : model.variables()) {
        if (v.kind != VarKind::Binary) continue;
        if (!any_binary) os << "Binaries\n";
        any_binary = true;
        os << ' ' << v.name;
        if (++on_line == 10) {
            os << '\n';
            on_line = 0;
        }
    }
    if (any_binary && on_line != 0) os << '\n';
    os << "End\n";
}

std::string to_lp_string(const MilpModel& model) {
    std::ostringstream os;
    write_lp(model, os);
    return os.str();
}

// ---------------------------------------------------------------------------
// LP reader

namespace {

enum class Section { None, Objective, Constraints, Bounds, Binaries, Generals, End };

std::string lower_case(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool section_header(const std::string& line, Section& out) {
    const std::string l = lower_case(trim(line));
    if (l == "minimize" || l == "minimise" || l == "minimum" || l == "min") {
        out = Section::Objective;
    } else if (l == "maximize" || l == "maximise" || l == "max" || l == "maximum") {
        throw ModelError("LP reader: only minimization models are supported");
    } else if (l == "subject to" || l == "such that" || l == "st" || l == "s.t." || l == "st:") {
        out = Section::Constraints;
    } else if (l == "bounds" || l == "bound") {
        out = Section::Bounds;
    } else if (l == "binaries" || l == "binary" || l == "bin") {
        out = Section::Binaries;
    } else if (l == "generals" || l == "general" || l == "gen") {
        out = Section::Generals;
    } else if (l == "end") {
        out = Section::End;
    } else {
        return false;
    }
    return true;
}

enum class TokKind { Number, Name, Op, Colon, Sign };

struct Token {
    TokKind kind;
    std::string text;
    double value = 0.0;
};

bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '!' || c == '"' ||
           c == '#' || c == '$' || c == '%' || c == '&' || c == '(' || c == ')' || c == ',' ||
           c == ';' || c == '?' || c == '@' || c == '{' || c == '}' || c == '~' || c == '\'';
}

bool is_name_char(char c) {
    return is_name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '[' ||
           c == ']';
}

double parse_number(const std::string& text) {
    const std::string l = lower_case(text);
    if (l == "inf" || l == "infinity") return kInf;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ModelError("LP reader: bad number '" + text + "'");
    return v;
}

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '+' || c == '-') {
            out.push_back({TokKind::Sign, std::string(1, c)});
            ++i;
        } else if (c == ':') {
            out.push_back({TokKind::Colon, ":"});
            ++i;
        } else if (c == '<' || c == '>' || c == '=') {
            std::string op(1, c);
            if (i + 1 < text.size() && (text[i + 1] == '=' || text[i + 1] == '<' || text[i + 1] == '>')) {
                op += text[i + 1];
                ++i;
            }
            ++i;
            if (op == "<" || op == "=<") op = "<=";
            if (op == ">" || op == "=>") op = ">=";
            out.push_back({TokKind::Op, op});
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t j = i;
            while (j < text.size() &&
                   (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.' ||
                    text[j] == 'e' || text[j] == 'E' ||
                    ((text[j] == '+' || text[j] == '-') && j > i &&
                     (text[j - 1] == 'e' || text[j - 1] == 'E'))))
                ++j;
            const std::string num = text.substr(i, j - i);
            out.push_back({TokKind::Number, num, parse_number(num)});
            i = j;
        } else if (is_name_start(c)) {
            std::size_t j = i;
            while (j < text.size() && is_name_char(text[j])) ++j;
            std::string name = text.substr(i, j - i);
            const std::string l = lower_case(name);
            if (l == "inf" || l == "infinity")
                out.push_back({TokKind::Number, name, kInf});
            else
                out.push_back({TokKind::Name, name});
            i = j;
        } else {
            throw ModelError(std::string("LP reader: unexpected character '") + c + "'");
        }
    }
    return out;
}

struct NamedTerm {
    std::string name;
    double coef;
};

/// Parses "[+|-] [coef] name ..." starting at pos; stops at an operator or at
/// a Name followed by Colon (start of the next labelled row).
std::vector<NamedTerm> parse_expression(const std::vector<Token>& tok, std::size_t& pos,
                                        double& constant) {
    std::vector<NamedTerm> terms;
    while (pos < tok.size()) {
        if (tok[pos].kind == TokKind::Op) break;
        if (tok[pos].kind == TokKind::Name && pos + 1 < tok.size() && tok[pos + 1].kind == TokKind::Colon)
            break;
        double sign = 1.0;
        bool saw_sign = false;
        while (pos < tok.size() && tok[pos].kind == TokKind::Sign) {
            if (tok[pos].text == "-") sign = -sign;
            saw_sign = true;
            ++pos;
        }
        if (pos >= tok.size()) throw ModelError("LP reader: dangling sign");
        double coef = 1.0;
        bool saw_number = false;
        if (tok[pos].kind == TokKind::Number) {
            coef = tok[pos].value;
            saw_number = true;
            ++pos;
        }
        if (pos < tok.size() && tok[pos].kind == TokKind::Name &&
            !(pos + 1 < tok.size() && tok[pos + 1].kind == TokKind::Colon)) {
            terms.push_back({tok[pos].text, sign * coef});
            ++pos;
        } else if (saw_number) {
            constant += sign * coef;
        } else if (saw_sign) {
            throw ModelError("LP reader: sign without term");
        } else {
            break;
        }
    }
    return terms;
}

} // namespace

MilpModel read_lp(std::istream& is) {
    std::map<Section, std::string> body;
    Section current = Section::None;
    std::string line;
    while (std::getline(is, line)) {
        if (auto cut = line.find('\\'); cut != std::string::npos) line.erase(cut);
        if (trim(line).empty()) continue;
        Section next;
        if (section_header(line, next)) {
            current = next;
            if (current == Section::End) break;
            continue;
        }
        if (current == Section::None) throw ModelError("LP reader: content before first section");
        body[current] += line + "\n";
    }

    struct RawRow {
        std::string name;
        std::vector<NamedTerm> terms;
        Sense sense;
        double rhs;
    };
    std::vector<std::string> first_seen;
    std::unordered_map<std::string, int> seen_index;
    auto touch = [&](const std::string& name) {
        if (seen_index.emplace(name, static_cast<int>(first_seen.size())).second) first_seen.push_back(name);
    };

    // Objective
    std::vector<NamedTerm> objective;
    double objective_constant = 0.0;
    {
        auto tok = tokenize(body[Section::Objective]);
        std::size_t pos = 0;
        if (pos + 1 < tok.size() && tok[pos].kind == TokKind::Name && tok[pos + 1].kind == TokKind::Colon)
            pos += 2;
        objective = parse_expression(tok, pos, objective_constant);
        if (pos != tok.size()) throw ModelError("LP reader: trailing tokens in objective");
        for (const auto& t : objective) touch(t.name);
    }

    // Constraints
    std::vector<RawRow> rows;
    {
        auto tok = tokenize(body[Section::Constraints]);
        std::size_t pos = 0;
        while (pos < tok.size()) {
            RawRow row;
            if (pos + 1 < tok.size() && tok[pos].kind == TokKind::Name && tok[pos + 1].kind == TokKind::Colon) {
                row.name = tok[pos].text;
                pos += 2;
            } else {
                row.name = "R" + std::to_string(rows.size() + 1);
            }
            double lhs_const = 0.0;
            row.terms = parse_expression(tok, pos, lhs_const);
            if (pos >= tok.size() || tok[pos].kind != TokKind::Op)
                throw ModelError("LP reader: constraint '" + row.name + "' has no relational operator");
            const std::string op = tok[pos++].text;
            row.sense = op == "<=" ? Sense::LessEqual : op == ">=" ? Sense::GreaterEqual : Sense::Equal;
            double sign = 1.0;
            while (pos < tok.size() && tok[pos].kind == TokKind::Sign) {
                if (tok[pos].text == "-") sign = -sign;
                ++pos;
            }
            if (pos >= tok.size() || tok[pos].kind != TokKind::Number)
                throw ModelError("LP reader: constraint '" + row.name + "' has no right-hand side");
            row.rhs = sign * tok[pos++].value - lhs_const;
            for (const auto& t : row.terms) touch(t.name);
            rows.push_back(std::move(row));
        }
    }

    // Bounds: one statement per line.
    struct RawBound {
        std::string name;
        double lower;
        double upper;
        bool has_lower;
        bool has_upper;
    };
    std::vector<std::string> bound_order;
    std::unordered_map<std::string, RawBound> bounds;
    {
        std::istringstream lines(body[Section::Bounds]);
        while (std::getline(lines, line)) {
            auto tok = tokenize(line);
            if (tok.empty()) continue;
            auto signed_number = [&](std::size_t& p) {
                double sign = 1.0;
                while (p < tok.size() && tok[p].kind == TokKind::Sign) {
                    if (tok[p].text == "-") sign = -sign;
                    ++p;
                }
                if (p >= tok.size() || tok[p].kind != TokKind::Number)
                    throw ModelError("LP reader: bad bound line '" + trim(line) + "'");
                return sign * tok[p++].value;
            };
            auto entry = [&](const std::string& name) -> RawBound& {
                auto [it, inserted] = bounds.try_emplace(name, RawBound{name, 0.0, kInf, false, false});
                if (inserted) bound_order.push_back(name);
                return it->second;
            };
            std::size_t p = 0;
            if (tok[0].kind == TokKind::Name) {
                RawBound& b = entry(tok[0].text);
                p = 1;
                if (p < tok.size() && tok[p].kind == TokKind::Name && lower_case(tok[p].text) == "free") {
                    b.lower = -kInf;
                    b.upper = kInf;
                    b.has_lower = b.has_upper = true;
                    continue;
                }
                if (p >= tok.size() || tok[p].kind != TokKind::Op)
                    throw ModelError("LP reader: bad bound line '" + trim(line) + "'");
                const std::string op = tok[p++].text;
                const double v = signed_number(p);
                if (op == "<=") { b.upper = v; b.has_upper = true; }
                else if (op == ">=") { b.lower = v; b.has_lower = true; }
                else { b.lower = b.upper = v; b.has_lower = b.has_upper = true; }
            } else {
                const double lo = signed_number(p);
                if (p >= tok.size() || tok[p].kind != TokKind::Op || tok[p].text != "<=")
                    throw ModelError("LP reader: bad bound line '" + trim(line) + "'");
                ++p;
                if (p >= tok.size() || tok[p].kind != TokKind::Name)
                    throw ModelError("LP reader: bad bound line '" + trim(line) + "'");
                RawBound& b = entry(tok[p++].text);
                b.lower = lo;
                b.has_lower = true;
                if (p < tok.size()) {
                    if (tok[p].kind != TokKind::Op || tok[p].text != "<=")
                        throw ModelError("LP reader: bad bound line '" + trim(line) + "'");
                    ++p;
                    b.upper = signed_number(p);
                    b.has_upper = true;
                }
            }
            if (p != tok.size()) throw ModelError("LP reader: trailing tokens in bound '" + trim(line) + "'");
        }
    }

    std::vector<std::string> binaries;
    for (const auto& tok : tokenize(body[Section::Binaries])) {
        if (tok.kind != TokKind::Name) throw ModelError("LP reader: bad token in Binaries");
        binaries.push_back(tok.text);
    }
    if (!trim(body[Section::Generals]).empty())
        throw ModelError("LP reader: general integer variables are not supported");

    // Column order: Bounds section first (write_lp lists every column there),
    // then first appearance elsewhere.
    std::vector<std::string> order = bound_order;
    std::unordered_map<std::string, int> index;
    for (std::size_t k = 0; k < order.size(); ++k) index.emplace(order[k], static_cast<int>(k));
    for (const auto& name : first_seen)
        if (index.emplace(name, static_cast<int>(order.size())).second) order.push_back(name);
    for (const auto& name : binaries)
        if (index.emplace(name, static_cast<int>(order.size())).second) order.push_back(name);

    MilpModel model;
    std::unordered_map<std::string, bool> is_binary;
    for (const auto& b : binaries) is_binary[b] = true;
    for (const auto& name : order) {
        const bool bin = is_binary.count(name) > 0;
        double lo = 0.0;
        double hi = bin ? 1.0 : kInf;
        if (auto it = bounds.find(name); it != bounds.end()) {
            if (it->second.has_lower) lo = it->second.lower;
            if (it->second.has_upper) hi = it->second.upper;
            // A lone negative upper bound implies a free lower bound.
            if (!it->second.has_lower && it->second.has_upper && hi < 0.0) lo = -kInf;
        }
        model.add_variable(name, bin ? VarKind::Binary : VarKind::Continuous, lo, hi);
    }
    auto resolve = [&](const std::vector<NamedTerm>& terms) {
        std::vector<Term> out;
        out.reserve(terms.size());
        for (const auto& t : terms) out.push_back({index.at(t.name), t.coef});
        return out;
    };
    model.set_objective(resolve(objective), objective_constant);
    for (auto& row : rows) model.add_constraint(row.name, resolve(row.terms), row.sense, row.rhs);
    model.validate();
    return model;
}

MilpModel parse_lp(const std::string& text) {
    std::istringstream is(text);
    return read_lp(is);
}

} // namespace mgrisk
