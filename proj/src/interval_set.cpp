#include "pvim/interval_set.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "pvim/errors.hpp"

namespace pvim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Interval canonical(Interval iv) {
    if (std::isinf(iv.lo)) iv.lo_closed = false;
    if (std::isinf(iv.hi)) iv.hi_closed = false;
    return iv;
}

std::string format_number(double v) {
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

Interval Interval::real_line() { return {-kInf, kInf, false, false}; }

bool Interval::empty() const {
    if (std::isnan(lo) || std::isnan(hi)) return true;
    if (lo > hi) return true;
    if (lo == hi) return !(lo_closed && hi_closed) || std::isinf(lo);
    return false;
}

bool Interval::contains(double x) const {
    if (empty() || std::isnan(x) || std::isinf(x)) return false;
    const bool above = lo_closed ? x >= lo : x > lo;
    const bool below = hi_closed ? x <= hi : x < hi;
    return above && below;
}

double Interval::length() const { return empty() ? 0.0 : hi - lo; }

std::string Interval::to_string() const {
    if (empty()) return "{}";
    if (degenerate()) return "{" + format_number(lo) + "}";
    return std::string(lo_closed ? "[" : "(") + format_number(lo) + ", " + format_number(hi) +
           (hi_closed ? "]" : ")");
}

IntervalSet::IntervalSet(Interval iv) : parts_{iv} { normalize(); }

IntervalSet::IntervalSet(std::vector<Interval> parts) : parts_(std::move(parts)) { normalize(); }

void IntervalSet::normalize() {
    std::vector<Interval> kept;
    kept.reserve(parts_.size());
    for (const auto& iv : parts_) {
        if (!iv.empty()) kept.push_back(canonical(iv));
    }
    std::sort(kept.begin(), kept.end(), [](const Interval& a, const Interval& b) {
        if (a.lo != b.lo) return a.lo < b.lo;
        return a.lo_closed && !b.lo_closed;
    });
    std::vector<Interval> merged;
    for (const auto& iv : kept) {
        if (merged.empty()) {
            merged.push_back(iv);
            continue;
        }
        Interval& last = merged.back();
        const bool touches = iv.lo < last.hi || (iv.lo == last.hi && (last.hi_closed || iv.lo_closed));
        if (!touches) {
            merged.push_back(iv);
            continue;
        }
        if (iv.hi > last.hi) {
            last.hi = iv.hi;
            last.hi_closed = iv.hi_closed;
        } else if (iv.hi == last.hi) {
            last.hi_closed = last.hi_closed || iv.hi_closed;
        }
    }
    parts_ = std::move(merged);
}

bool IntervalSet::contains(double x) const {
    return std::any_of(parts_.begin(), parts_.end(), [x](const Interval& iv) { return iv.contains(x); });
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
    std::vector<Interval> all = parts_;
    all.insert(all.end(), other.parts_.begin(), other.parts_.end());
    return IntervalSet(std::move(all));
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
    std::vector<Interval> out;
    for (const auto& a : parts_) {
        for (const auto& b : other.parts_) {
            Interval iv;
            if (a.lo > b.lo) {
                iv.lo = a.lo;
                iv.lo_closed = a.lo_closed;
            } else if (b.lo > a.lo) {
                iv.lo = b.lo;
                iv.lo_closed = b.lo_closed;
            } else {
                iv.lo = a.lo;
                iv.lo_closed = a.lo_closed && b.lo_closed;
            }
            if (a.hi < b.hi) {
                iv.hi = a.hi;
                iv.hi_closed = a.hi_closed;
            } else if (b.hi < a.hi) {
                iv.hi = b.hi;
                iv.hi_closed = b.hi_closed;
            } else {
                iv.hi = a.hi;
                iv.hi_closed = a.hi_closed && b.hi_closed;
            }
            if (!iv.empty()) out.push_back(iv);
        }
    }
    return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::complement() const {
    std::vector<Interval> out;
    double cursor = -kInf;
    bool cursor_closed = false;
    for (const auto& iv : parts_) {
        out.push_back(Interval{cursor, iv.lo, cursor_closed, !iv.lo_closed});
        cursor = iv.hi;
        cursor_closed = !iv.hi_closed;
    }
    out.push_back(Interval{cursor, kInf, cursor_closed, false});
    return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::complement_within(const IntervalSet& ambient) const {
    return ambient.intersect(complement());
}

IntervalSet IntervalSet::difference(const IntervalSet& other) const { return intersect(other.complement()); }

bool IntervalSet::subset_of(const IntervalSet& other) const { return difference(other).empty(); }

IntervalSet IntervalSet::closure() const {
    std::vector<Interval> out = parts_;
    for (auto& iv : out) {
        iv.lo_closed = true;
        iv.hi_closed = true;
    }
    return IntervalSet(std::move(out));
}

std::vector<double> IntervalSet::isolated_points() const {
    std::vector<double> pts;
    for (const auto& iv : parts_) {
        if (iv.degenerate()) pts.push_back(iv.lo);
    }
    return pts;
}

std::optional<Interval> IntervalSet::hull() const {
    if (parts_.empty()) return std::nullopt;
    return Interval{parts_.front().lo, parts_.back().hi, parts_.front().lo_closed, parts_.back().hi_closed};
}

double IntervalSet::infimum() const { return parts_.empty() ? kInf : parts_.front().lo; }

double IntervalSet::supremum() const { return parts_.empty() ? -kInf : parts_.back().hi; }

double IntervalSet::measure() const {
    double total = 0.0;
    for (const auto& iv : parts_) total += iv.length();
    return total;
}

bool IntervalSet::all_closed() const {
    return std::all_of(parts_.begin(), parts_.end(), [](const Interval& iv) {
        return (iv.lo_closed || std::isinf(iv.lo)) && (iv.hi_closed || std::isinf(iv.hi));
    });
}

std::string IntervalSet::to_string() const {
    if (parts_.empty()) return "{}";
    std::string out;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        if (i) out += " U ";
        out += parts_[i].to_string();
    }
    return out;
}

Assertion::Assertion(IntervalSet s, IntervalSet amb) : set(s.intersect(amb)), ambient(std::move(amb)) {}

Assertion Assertion::complement() const { return Assertion(set.complement_within(ambient), ambient); }

namespace {

struct Token {
    enum Kind { Number, Name, Op } kind;
    std::string text;
    double value = 0.0;
};

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '<' || c == '>' || c == '=') {
            std::string op(1, c);
            if (i + 1 < text.size() && text[i + 1] == '=') op += '=';
            if (op == "=") throw DomainError("null: use '==' for equality");
            out.push_back({Token::Op, op});
            i += op.size();
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' || text[j] == '^'))
                ++j;
            std::string name = text.substr(i, j - i);
            if (name == "inf" || name == "infinity") {
                out.push_back({Token::Number, name, kInf});
            } else {
                out.push_back({Token::Name, name});
            }
            i = j;
        } else {
            double v = 0.0;
            const auto res = std::from_chars(text.data() + i, text.data() + text.size(), v);
            if (res.ec != std::errc()) throw DomainError("null: cannot parse '" + text + "'");
            out.push_back({Token::Number, text.substr(i, res.ptr - (text.data() + i)), v});
            i = static_cast<std::size_t>(res.ptr - text.data());
        }
    }
    return out;
}

// Set of theta with "theta OP v".
Interval relation(const std::string& op, double v) {
    if (op == "<=") return Interval{-kInf, v, false, true};
    if (op == "<") return Interval{-kInf, v, false, false};
    if (op == ">=") return Interval{v, kInf, true, false};
    if (op == ">") return Interval{v, kInf, false, false};
    if (op == "==") return Interval::point(v);
    throw DomainError("null: unknown relation '" + op + "'");
}

std::string mirror(const std::string& op) {
    if (op == "<=") return ">=";
    if (op == "<") return ">";
    if (op == ">=") return "<=";
    if (op == ">") return "<";
    return op;
}

}  // namespace

Assertion parse_assertion(const std::string& text, const IntervalSet& ambient) {
    const auto tok = tokenize(text);
    IntervalSet set;
    if (tok.size() == 3 && tok[0].kind == Token::Name && tok[1].kind == Token::Op && tok[2].kind == Token::Number) {
        set = IntervalSet(relation(tok[1].text, tok[2].value));
    } else if (tok.size() == 3 && tok[0].kind == Token::Number && tok[1].kind == Token::Op &&
               tok[2].kind == Token::Name) {
        set = IntervalSet(relation(mirror(tok[1].text), tok[0].value));
    } else if (tok.size() == 5 && tok[0].kind == Token::Number && tok[1].kind == Token::Op &&
               tok[2].kind == Token::Name && tok[3].kind == Token::Op && tok[4].kind == Token::Number) {
        const auto& a = tok[1].text;
        const auto& b = tok[3].text;
        if ((a != "<" && a != "<=") || (b != "<" && b != "<="))
            throw DomainError("null: a two-sided range must read 'lo <= theta <= hi'");
        set = IntervalSet(Interval{tok[0].value, tok[4].value, a == "<=", b == "<="});
    } else {
        throw DomainError("null: cannot parse '" + text + "'");
    }
    Assertion out(set, ambient);
    if (out.empty()) throw DomainError("null: '" + text + "' is empty within the parameter space");
    return out;
}

}  // namespace pvim
