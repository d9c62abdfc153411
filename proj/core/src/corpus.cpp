// SPDX-License-Identifier: Apache-2.0
#include "tulip/corpus.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#ifndef TULIP_SOURCE_DATA_DIR
#define TULIP_SOURCE_DATA_DIR ""
#endif
#ifndef TULIP_INSTALL_DATA_DIR
#define TULIP_INSTALL_DATA_DIR ""
#endif

namespace tulip::corpus {

namespace fs = std::filesystem;

namespace {

// Errors read like the Python runner's so both bindings report alike.
[[noreturn]] void value_error(const std::string& message)
{
    throw std::invalid_argument("ValueError: " + message);
}

[[noreturn]] void zero_division()
{
    throw std::domain_error("ZeroDivisionError: division by zero");
}

// A number with Python's int/float split: integer arithmetic stays integral
// until true division or overflow.
struct Num {
    bool is_int = true;
    std::int64_t i = 0;
    double d = 0.0;

    static Num of(std::int64_t v) { return {true, v, 0.0}; }
    static Num of(double v) { return {false, 0, v}; }
    static Num from(const Json& j)
    {
        if (j.is_number_unsigned() && j.get<std::uint64_t>() > std::uint64_t(std::numeric_limits<std::int64_t>::max()))
            return of(j.get<double>());
        if (j.is_number_integer())
            return of(j.get<std::int64_t>());
        return of(j.get<double>());
    }

    double f() const { return is_int ? static_cast<double>(i) : d; }
    Json json() const { return is_int ? Json(i) : Json(d); }
};

Num operator+(Num a, Num b)
{
    std::int64_t r;
    if (a.is_int && b.is_int && !__builtin_add_overflow(a.i, b.i, &r))
        return Num::of(r);
    return Num::of(a.f() + b.f());
}

Num operator-(Num a, Num b)
{
    std::int64_t r;
    if (a.is_int && b.is_int && !__builtin_sub_overflow(a.i, b.i, &r))
        return Num::of(r);
    return Num::of(a.f() - b.f());
}

Num operator*(Num a, Num b)
{
    std::int64_t r;
    if (a.is_int && b.is_int && !__builtin_mul_overflow(a.i, b.i, &r))
        return Num::of(r);
    return Num::of(a.f() * b.f());
}

Num operator-(Num a)
{
    return Num::of(std::int64_t{0}) - a;
}

Num truediv(Num a, Num b)
{
    if (b.f() == 0.0)
        zero_division();
    return Num::of(a.f() / b.f());
}

Num pow(Num base, Num exponent)
{
    if (base.is_int && exponent.is_int && exponent.i >= 0) {
        Num r = Num::of(std::int64_t{1});
        for (std::int64_t k = 0; k < exponent.i; ++k) {
            r = r * base;
            if (!r.is_int)
                return Num::of(std::pow(base.f(), exponent.f()));
        }
        return r;
    }
    if (base.f() == 0.0 && exponent.f() < 0)
        zero_division();
    return Num::of(std::pow(base.f(), exponent.f()));
}

Num abs(Num a)
{
    if (a.is_int && a.i != std::numeric_limits<std::int64_t>::min())
        return Num::of(a.i < 0 ? -a.i : a.i);
    return Num::of(std::fabs(a.f()));
}

// Integer results too large for int64 fall back to the nearest double.
Json wide(__int128 v)
{
    if (v <= std::numeric_limits<std::int64_t>::max() && v >= std::numeric_limits<std::int64_t>::min())
        return static_cast<std::int64_t>(v);
    return static_cast<double>(v);
}

Num num(const Json& args, const char* key) { return Num::from(args.at(key)); }
std::int64_t integer(const Json& args, const char* key) { return args.at(key).get<std::int64_t>(); }
bool boolean(const Json& args, const char* key) { return args.at(key).get<bool>(); }

std::vector<Num> numbers(const Json& args, const char* key)
{
    std::vector<Num> out;
    for (const auto& v : args.at(key))
        out.push_back(Num::from(v));
    return out;
}

std::vector<Num> non_empty(const Json& args, const char* key)
{
    auto v = numbers(args, key);
    if (v.empty())
        value_error("The list must not be empty.");
    return v;
}

Json to_json(const std::vector<Num>& v)
{
    Json out = Json::array();
    for (const auto& n : v)
        out.push_back(n.json());
    return out;
}

// Python sets of numbers: equality by value, the first representative stays.
std::vector<Num> distinct(const std::vector<Num>& v)
{
    std::vector<Num> out;
    for (const auto& n : v)
        if (std::none_of(out.begin(), out.end(), [&](const Num& m) { return m.f() == n.f(); }))
            out.push_back(n);
    return out;
}

bool contains(const std::vector<Num>& set, const Num& n)
{
    return std::any_of(set.begin(), set.end(), [&](const Num& m) { return m.f() == n.f(); });
}

std::vector<Num> sorted(std::vector<Num> v)
{
    std::stable_sort(v.begin(), v.end(), [](const Num& a, const Num& b) { return a.f() < b.f(); });
    return v;
}

Num sum(const std::vector<Num>& v)
{
    Num total = Num::of(std::int64_t{0});
    for (const auto& n : v)
        total = total + n;
    return total;
}

Num mean_of(const std::vector<Num>& v)
{
    return truediv(sum(v), Num::of(static_cast<std::int64_t>(v.size())));
}

double population_variance(const std::vector<Num>& v)
{
    double m = mean_of(v).f();
    double total = 0.0;
    for (const auto& x : v)
        total = total + (x.f() - m) * (x.f() - m);
    return total / static_cast<double>(v.size());
}

Num max_of(const std::vector<Num>& v)
{
    Num best = v.front();
    for (const auto& n : v)
        if (n.f() > best.f())
            best = n;
    return best;
}

Num min_of(const std::vector<Num>& v)
{
    Num best = v.front();
    for (const auto& n : v)
        if (n.f() < best.f())
            best = n;
    return best;
}

bool is_prime(std::int64_t n)
{
    if (n < 2)
        return false;
    for (std::int64_t i = 2; i <= n / i; ++i)
        if (n % i == 0)
            return false;
    return true;
}

__int128 comb(std::int64_t n, std::int64_t k)
{
    if (k > n)
        return 0;
    k = std::min(k, n - k);
    __int128 r = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > (__int128(1) << 100))
            return static_cast<__int128>(std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                                                              std::lgamma(n - k + 1.0))));
    }
    return r;
}

double factorial_f(std::int64_t n)
{
    double r = 1.0;
    for (std::int64_t i = 2; i <= n; ++i)
        r *= static_cast<double>(i);
    return r;
}

Num comb_num(std::int64_t n, std::int64_t k)
{
    Json j = wide(comb(n, k));
    return Num::from(j);
}

void check_probability(double p)
{
    if (p < 0 || p > 1)
        value_error("The probability must lie between 0 and 1.");
}

std::int64_t floor_int(double x)
{
    if (!std::isfinite(x))
        throw std::overflow_error("OverflowError: cannot convert float infinity to integer");
    return static_cast<std::int64_t>(std::floor(x));
}

using K = ParamKind;
using Fn = std::function<Json(const Json&)>;

struct Builder {
    std::vector<NativeFunction> out;
    std::string module;

    void def(std::string name, std::vector<K> kinds, Fn fn, std::vector<Json> samples)
    {
        out.push_back({module, std::move(name), NativeTool{std::move(kinds), std::move(fn)}, std::move(samples)});
    }
};

void math_tools(Builder& b)
{
    b.module = "math_tools";
    b.def("add", {K::Number, K::Number}, [](const Json& a) { return (num(a, "a") + num(a, "b")).json(); },
          {{{"a", 1}, {"b", 2}}, {{"a", 1064947554}, {"b", 32478}}, {{"a", 0.1}, {"b", 0.2}}});
    b.def("subtract", {K::Number, K::Number}, [](const Json& a) { return (num(a, "a") - num(a, "b")).json(); },
          {{{"a", 10}, {"b", 4}}, {{"a", 2.5}, {"b", 7}}});
    b.def("multiply", {K::Number, K::Number}, [](const Json& a) { return (num(a, "a") * num(a, "b")).json(); },
          {{{"a", 45342}, {"b", 23487}}, {{"a", 1.5}, {"b", -4}}});
    b.def("divide", {K::Number, K::Number},
          [](const Json& a) {
              if (num(a, "b").f() == 0)
                  value_error("Cannot divide by zero.");
              return truediv(num(a, "a"), num(a, "b")).json();
          },
          {{{"a", 100}, {"b", 4}}, {{"a", 1}, {"b", 3}}, {{"a", 1}, {"b", 0}}});
    b.def("power", {K::Number, K::Number},
          [](const Json& a) {
              auto base = num(a, "base"), exponent = num(a, "exponent");
              if (base.f() < 0 && std::floor(exponent.f()) != exponent.f())
                  value_error("A negative base requires an integer exponent.");
              if (base.f() == 0 && exponent.f() < 0)
                  value_error("Zero cannot be raised to a negative power.");
              return pow(base, exponent).json();
          },
          {{{"base", 2}, {"exponent", 10}}, {{"base", 2}, {"exponent", -2}}, {{"base", 9}, {"exponent", 0.5}},
           {{"base", -8}, {"exponent", 0.5}}});
    b.def("modulo", {K::Integer, K::Integer},
          [](const Json& a) {
              auto x = integer(a, "a"), y = integer(a, "b");
              if (y == 0)
                  value_error("Cannot take a remainder modulo zero.");
              auto r = x % y;
              if (r != 0 && ((r < 0) != (y < 0)))
                  r += y;
              return Json(r);
          },
          {{{"a", 17}, {"b", 5}}, {{"a", -17}, {"b", 5}}, {{"a", 17}, {"b", -5}}});
    b.def("square_root", {K::Number},
          [](const Json& a) {
              auto x = num(a, "number").f();
              if (x < 0)
                  value_error("Cannot take the square root of a negative number.");
              return Json(std::sqrt(x));
          },
          {{{"number", 23456789}}, {{"number", 2}}, {{"number", -1}}});
    b.def("mean", {K::Array}, [](const Json& a) { return mean_of(non_empty(a, "numbers")).json(); },
          {{{"numbers", {1, 2, 3, 4}}}, {{"numbers", {2.5, 3.5}}}, {{"numbers", Json::array()}}});
    b.def("standard_deviation", {K::Array},
          [](const Json& a) { return Json(std::sqrt(population_variance(non_empty(a, "numbers")))); },
          {{{"numbers", {2, 4, 4, 4, 5, 5, 7, 9}}}, {{"numbers", {1.5}}}});
    b.def("coefficient_of_variation", {K::Array},
          [](const Json& a) {
              auto v = non_empty(a, "numbers");
              double stdev = std::sqrt(population_variance(v));
              return truediv(Num::of(stdev), mean_of(v)).json();
          },
          {{{"numbers", {2, 4, 4, 4, 5, 5, 7, 9}}}, {{"numbers", {10, 12, 23, 23, 16, 23, 21, 16}}}});
}

void number_theory(Builder& b)
{
    b.module = "number_theory";
    b.def("factorial", {K::Integer},
          [](const Json& a) {
              auto n = integer(a, "n");
              if (n < 0)
                  value_error("The factorial is undefined for negative numbers.");
              if (n > 170)
                  throw std::overflow_error("OverflowError: factorial result too large");
              __int128 r = 1;
              for (std::int64_t i = 2; i <= n; ++i) {
                  if (r > std::numeric_limits<std::int64_t>::max())
                      return Json(factorial_f(n));
                  r *= i;
              }
              return wide(r);
          },
          {{{"n", 10}}, {{"n", 0}}, {{"n", 20}}, {{"n", -1}}});
    b.def("fibonacci_recursive", {K::Integer},
          [](const Json& a) {
              auto n = integer(a, "n");
              if (n < 0)
                  value_error("The index must be non-negative.");
              __int128 x = 0, y = 1;
              for (std::int64_t i = 0; i < n; ++i) {
                  auto next = x + y;
                  x = y;
                  y = next;
                  if (x > (__int128(1) << 120))
                      return Json(static_cast<double>(x));
              }
              return wide(x);
          },
          {{{"n", 10}}, {{"n", 0}}, {{"n", 1}}, {{"n", 20}}});
    b.def("gcd", {K::Integer, K::Integer},
          [](const Json& a) { return Json(std::gcd(integer(a, "a"), integer(a, "b"))); },
          {{{"a", 462}, {"b", 1071}}, {{"a", -12}, {"b", 18}}, {{"a", 0}, {"b", 0}}});
    b.def("lcm", {K::Integer, K::Integer},
          [](const Json& a) {
              auto x = integer(a, "a"), y = integer(a, "b");
              if (x == 0 || y == 0)
                  return Json(0);
              __int128 p = static_cast<__int128>(x) * y;
              if (p < 0)
                  p = -p;
              return wide(p / std::gcd(x, y));
          },
          {{{"a", 4}, {"b", 6}}, {{"a", -3}, {"b", 7}}, {{"a", 0}, {"b", 5}}});
    b.def("is_prime", {K::Integer}, [](const Json& a) { return Json(is_prime(integer(a, "n"))); },
          {{{"n", 97}}, {{"n", 1}}, {{"n", 91}}});
    b.def("next_prime", {K::Integer},
          [](const Json& a) {
              auto c = std::max<std::int64_t>(integer(a, "n") + 1, 2);
              while (!is_prime(c))
                  ++c;
              return Json(c);
          },
          {{{"n", 13}}, {{"n", -5}}, {{"n", 100}}});
    b.def("sum_of_divisors", {K::Integer},
          [](const Json& a) {
              auto n = integer(a, "n");
              if (n <= 0)
                  value_error("The number must be positive.");
              std::int64_t total = 0;
              for (std::int64_t i = 1; i <= n / i; ++i)
                  if (n % i == 0)
                      total += (i == n / i) ? i : i + n / i;
              return Json(total);
          },
          {{{"n", 28}}, {{"n", 1}}, {{"n", 36}}, {{"n", 0}}});
    b.def("count_divisors", {K::Integer},
          [](const Json& a) {
              auto n = integer(a, "n");
              if (n <= 0)
                  value_error("The number must be positive.");
              std::int64_t count = 0;
              for (std::int64_t i = 1; i <= n / i; ++i)
                  if (n % i == 0)
                      count += (i == n / i) ? 1 : 2;
              return Json(count);
          },
          {{{"n", 28}}, {{"n", 1}}, {{"n", 36}}});
    b.def("digit_sum", {K::Integer},
          [](const Json& a) {
              auto digits = std::to_string(integer(a, "n"));
              std::int64_t total = 0;
              for (char c : digits)
                  if (c >= '0' && c <= '9')
                      total += c - '0';
              return Json(total);
          },
          {{{"n", 9875}}, {{"n", -406}}, {{"n", 0}}});
    b.def("binomial_coefficient", {K::Integer, K::Integer},
          [](const Json& a) {
              auto n = integer(a, "n"), k = integer(a, "k");
              if (n < 0 || k < 0)
                  value_error("Both arguments must be non-negative.");
              return wide(comb(n, k));
          },
          {{{"n", 10}, {"k", 3}}, {{"n", 5}, {"k", 7}}, {{"n", 40}, {"k", 20}}});
}

void algebra(Builder& b)
{
    b.module = "algebra";
    b.def("solve_linear_equation", {K::Number, K::Number},
          [](const Json& a) {
              if (num(a, "a").f() == 0)
                  value_error("The coefficient of x must not be zero.");
              return truediv(-num(a, "b"), num(a, "a")).json();
          },
          {{{"a", 2}, {"b", -8}}, {{"a", 3}, {"b", 1}}, {{"a", 0}, {"b", 1}}});
    b.def("quadratic_discriminant", {K::Number, K::Number, K::Number},
          [](const Json& a) {
              auto x = num(a, "a"), y = num(a, "b"), z = num(a, "c");
              return (y * y - Num::of(std::int64_t{4}) * x * z).json();
          },
          {{{"a", 1}, {"b", -3}, {"c", 2}}, {{"a", 0.5}, {"b", 1}, {"c", 2}}});
    b.def("larger_quadratic_root", {K::Number, K::Number, K::Number},
          [](const Json& a) {
              auto x = num(a, "a"), y = num(a, "b"), z = num(a, "c");
              if (x.f() == 0)
                  value_error("The quadratic coefficient must not be zero.");
              auto d = y * y - Num::of(std::int64_t{4}) * x * z;
              if (d.f() < 0)
                  value_error("The equation has no real roots.");
              auto two_a = Num::of(std::int64_t{2}) * x;
              double r1 = truediv(-y + Num::of(std::sqrt(d.f())), two_a).f();
              double r2 = truediv(-y - Num::of(std::sqrt(d.f())), two_a).f();
              return Json(std::max(r1, r2));
          },
          {{{"a", 1}, {"b", -3}, {"c", 2}}, {{"a", -1}, {"b", 0}, {"c", 4}}, {{"a", 1}, {"b", 0}, {"c", 1}}});
    b.def("evaluate_polynomial", {K::Array, K::Number},
          [](const Json& a) {
              auto c = numbers(a, "coefficients");
              auto x = num(a, "x");
              Num result = Num::of(std::int64_t{0});
              for (auto it = c.rbegin(); it != c.rend(); ++it)
                  result = result * x + *it;
              return result.json();
          },
          {{{"coefficients", {1, 2, 3}}, {"x", 2}}, {{"coefficients", {0.5, -1}}, {"x", 3.5}},
           {{"coefficients", Json::array()}, {"x", 1}}});
    b.def("arithmetic_series_sum", {K::Number, K::Number, K::Integer},
          [](const Json& a) {
              auto first = num(a, "first"), diff = num(a, "difference");
              auto n = integer(a, "count");
              if (n < 0)
                  value_error("The number of terms must be non-negative.");
              auto count = Num::of(n);
              auto total = count * (Num::of(std::int64_t{2}) * first + (count - Num::of(std::int64_t{1})) * diff);
              return truediv(total, Num::of(std::int64_t{2})).json();
          },
          {{{"first", 1}, {"difference", 1}, {"count", 100}}, {{"first", 2.5}, {"difference", -0.5}, {"count", 7}}});
    b.def("geometric_series_sum", {K::Number, K::Number, K::Integer},
          [](const Json& a) {
              auto first = num(a, "first"), ratio = num(a, "ratio");
              auto n = integer(a, "count");
              if (n < 0)
                  value_error("The number of terms must be non-negative.");
              if (ratio.f() == 1)
                  return (first * Num::of(n)).json();
              auto one = Num::of(std::int64_t{1});
              return truediv(first * (one - pow(ratio, Num::of(n))), one - ratio).json();
          },
          {{{"first", 1}, {"ratio", 2}, {"count", 10}}, {{"first", 3}, {"ratio", 0.5}, {"count", 6}},
           {{"first", 4}, {"ratio", 1}, {"count", 5}}});
    b.def("percentage", {K::Number, K::Number},
          [](const Json& a) {
              if (num(a, "whole").f() == 0)
                  value_error("The whole must not be zero.");
              return (truediv(num(a, "part"), num(a, "whole")) * Num::of(std::int64_t{100})).json();
          },
          {{{"part", 25}, {"whole", 200}}, {{"part", 1}, {"whole", 3}}});
    b.def("percentage_change", {K::Number, K::Number},
          [](const Json& a) {
              auto o = num(a, "old_value"), n = num(a, "new_value");
              if (o.f() == 0)
                  value_error("The original value must not be zero.");
              return (truediv(n - o, o) * Num::of(std::int64_t{100})).json();
          },
          {{{"old_value", 80}, {"new_value", 100}}, {{"old_value", 50}, {"new_value", 20}}});
    b.def("reciprocal", {K::Number},
          [](const Json& a) {
              if (num(a, "x").f() == 0)
                  value_error("Zero has no reciprocal.");
              return truediv(Num::of(std::int64_t{1}), num(a, "x")).json();
          },
          {{{"x", 4}}, {{"x", -0.25}}, {{"x", 0}}});
    b.def("average_of_two", {K::Number, K::Number},
          [](const Json& a) { return truediv(num(a, "a") + num(a, "b"), Num::of(std::int64_t{2})).json(); },
          {{{"a", 3}, {"b", 8}}, {{"a", -1.5}, {"b", 1.5}}});
}

void geometry(Builder& b)
{
    b.module = "geometry";
    const auto pi = Num::of(std::numbers::pi);
    auto non_negative = [](Num r) {
        if (r.f() < 0)
            value_error("The radius must be non-negative.");
        return r;
    };
    b.def("circle_area", {K::Number},
          [=](const Json& a) {
              auto r = non_negative(num(a, "radius"));
              return (pi * r * r).json();
          },
          {{{"radius", 3}}, {{"radius", 0.5}}, {{"radius", -1}}});
    b.def("circle_circumference", {K::Number},
          [=](const Json& a) {
              auto r = non_negative(num(a, "radius"));
              return (Num::of(std::int64_t{2}) * pi * r).json();
          },
          {{{"radius", 3}}, {{"radius", 1.25}}});
    b.def("rectangle_area", {K::Number, K::Number},
          [](const Json& a) { return (num(a, "length") * num(a, "width")).json(); },
          {{{"length", 4}, {"width", 5}}, {{"length", 2.5}, {"width", 1.5}}});
    b.def("rectangle_perimeter", {K::Number, K::Number},
          [](const Json& a) { return (Num::of(std::int64_t{2}) * (num(a, "length") + num(a, "width"))).json(); },
          {{{"length", 4}, {"width", 5}}, {{"length", 2.5}, {"width", 1.5}}});
    b.def("triangle_area", {K::Number, K::Number},
          [](const Json& a) { return (Num::of(0.5) * num(a, "base") * num(a, "height")).json(); },
          {{{"base", 10}, {"height", 4}}, {{"base", 3.5}, {"height", 2}}});
    b.def("hypotenuse", {K::Number, K::Number},
          [](const Json& a) { return Json(std::hypot(num(a, "a").f(), num(a, "b").f())); },
          {{{"a", 3}, {"b", 4}}, {{"a", 5}, {"b", 12}}, {{"a", 1.5}, {"b", 2}}});
    b.def("sphere_volume", {K::Number},
          [=](const Json& a) {
              auto r = non_negative(num(a, "radius"));
              return (truediv(Num::of(std::int64_t{4}), Num::of(std::int64_t{3})) * pi * r * r * r).json();
          },
          {{{"radius", 2}}, {{"radius", 0.75}}});
    b.def("cube_volume", {K::Number},
          [](const Json& a) {
              auto s = num(a, "side");
              return (s * s * s).json();
          },
          {{{"side", 3}}, {{"side", 1.5}}});
    b.def("cylinder_volume", {K::Number, K::Number},
          [=](const Json& a) {
              auto r = non_negative(num(a, "radius"));
              return (pi * r * r * num(a, "height")).json();
          },
          {{{"radius", 2}, {"height", 5}}, {{"radius", 0.5}, {"height", 1.5}}});
    b.def("distance_between_points", {K::Number, K::Number, K::Number, K::Number},
          [](const Json& a) {
              auto dx = num(a, "x2") - num(a, "x1"), dy = num(a, "y2") - num(a, "y1");
              return Json(std::hypot(dx.f(), dy.f()));
          },
          {{{"x1", 0}, {"y1", 0}, {"x2", 3}, {"y2", 4}}, {{"x1", -1.5}, {"y1", 2}, {"x2", 2.5}, {"y2", -1}}});
}

void statistics(Builder& b)
{
    b.module = "statistics";
    b.def("median", {K::Array},
          [](const Json& a) {
              auto v = sorted(non_empty(a, "numbers"));
              auto mid = v.size() / 2;
              if (v.size() % 2 == 1)
                  return v[mid].json();
              return truediv(v[mid - 1] + v[mid], Num::of(std::int64_t{2})).json();
          },
          {{{"numbers", {3, 1, 2}}}, {{"numbers", {4, 1, 3, 2}}}, {{"numbers", Json::array()}}});
    b.def("mode", {K::Array},
          [](const Json& a) {
              auto v = non_empty(a, "numbers");
              std::vector<std::pair<Num, int>> counts;
              for (const auto& x : v) {
                  auto it = std::find_if(counts.begin(), counts.end(),
                                         [&](const auto& c) { return c.first.f() == x.f(); });
                  if (it == counts.end())
                      counts.push_back({x, 1});
                  else
                      ++it->second;
              }
              int best = 0;
              for (const auto& c : counts)
                  best = std::max(best, c.second);
              std::vector<Num> tied;
              for (const auto& c : counts)
                  if (c.second == best)
                      tied.push_back(c.first);
              return min_of(tied).json();
          },
          {{{"numbers", {1, 2, 2, 3, 3}}}, {{"numbers", {5, 4, 4, 5.5}}}});
    b.def("variance", {K::Array}, [](const Json& a) { return Json(population_variance(non_empty(a, "numbers"))); },
          {{{"numbers", {2, 4, 4, 4, 5, 5, 7, 9}}}, {{"numbers", {1.5, 2.5}}}});
    b.def("value_range", {K::Array},
          [](const Json& a) {
              auto v = non_empty(a, "numbers");
              return (max_of(v) - min_of(v)).json();
          },
          {{{"numbers", {3, 9, -2}}}, {{"numbers", {1.5, 0.25}}}});
    b.def("minimum", {K::Array}, [](const Json& a) { return min_of(non_empty(a, "numbers")).json(); },
          {{{"numbers", {3, 9, -2}}}, {{"numbers", {1.5, 0.25}}}});
    b.def("maximum", {K::Array}, [](const Json& a) { return max_of(non_empty(a, "numbers")).json(); },
          {{{"numbers", {3, 9, -2}}}, {{"numbers", {1.5, 0.25}}}});
    b.def("sum_of_list", {K::Array}, [](const Json& a) { return sum(numbers(a, "numbers")).json(); },
          {{{"numbers", {1, 2, 3, 4}}}, {{"numbers", {0.5, 0.25}}}, {{"numbers", Json::array()}}});
    b.def("product_of_list", {K::Array},
          [](const Json& a) {
              Num r = Num::of(std::int64_t{1});
              for (const auto& x : numbers(a, "numbers"))
                  r = r * x;
              return r.json();
          },
          {{{"numbers", {1, 2, 3, 4}}}, {{"numbers", {0.5, 4}}}, {{"numbers", Json::array()}}});
    b.def("geometric_mean", {K::Array},
          [](const Json& a) {
              auto v = non_empty(a, "numbers");
              double total = 0.0;
              for (const auto& x : v) {
                  if (x.f() <= 0)
                      value_error("All values must be positive.");
                  total = total + std::log(x.f());
              }
              return Json(std::exp(total / static_cast<double>(v.size())));
          },
          {{{"numbers", {2, 8}}}, {{"numbers", {1, 3, 9}}}, {{"numbers", {1, -1}}}});
    b.def("harmonic_mean", {K::Array},
          [](const Json& a) {
              auto v = non_empty(a, "numbers");
              double total = 0.0;
              for (const auto& x : v) {
                  if (x.f() == 0)
                      value_error("All values must be non-zero.");
                  total = total + 1 / x.f();
              }
              if (total == 0)
                  value_error("The reciprocals sum to zero.");
              return Json(static_cast<double>(v.size()) / total);
          },
          {{{"numbers", {1, 2, 4}}}, {{"numbers", {2.5, 10}}}});
}

void calculus(Builder& b)
{
    b.module = "calculus";
    b.def("derivative_of_power", {K::Number, K::Integer, K::Number},
          [](const Json& a) {
              auto c = num(a, "coefficient"), x = num(a, "x");
              auto e = integer(a, "exponent");
              if (x.f() == 0 && e < 1)
                  value_error("The derivative is undefined at zero for this exponent.");
              return (c * Num::of(e) * pow(x, Num::of(e - 1))).json();
          },
          {{{"coefficient", 3}, {"exponent", 2}, {"x", 4}}, {{"coefficient", 1.5}, {"exponent", -1}, {"x", 2}}});
    b.def("integral_of_power", {K::Number, K::Integer, K::Number, K::Number},
          [](const Json& a) {
              auto e = integer(a, "exponent");
              if (e < 0)
                  value_error("The exponent must be non-negative.");
              auto n = Num::of(e + 1);
              auto diff = pow(num(a, "upper"), n) - pow(num(a, "lower"), n);
              return truediv(num(a, "coefficient") * diff, n).json();
          },
          {{{"coefficient", 3}, {"exponent", 2}, {"lower", 0}, {"upper", 2}},
           {{"coefficient", 0.5}, {"exponent", 1}, {"lower", -1.5}, {"upper", 3}}});
    b.def("polynomial_derivative_at", {K::Array, K::Number},
          [](const Json& a) {
              auto c = numbers(a, "coefficients");
              auto x = num(a, "x");
              Num result = Num::of(std::int64_t{0});
              for (auto i = static_cast<std::int64_t>(c.size()) - 1; i > 0; --i)
                  result = result * x + Num::of(i) * c[static_cast<size_t>(i)];
              return result.json();
          },
          {{{"coefficients", {1, 2, 3}}, {"x", 2}}, {{"coefficients", {0, 0.5, -1, 2}}, {"x", 1.5}}});
    b.def("polynomial_integral", {K::Array, K::Number, K::Number},
          [](const Json& a) {
              auto c = numbers(a, "coefficients");
              auto lo = num(a, "lower"), hi = num(a, "upper");
              Num total = Num::of(0.0);
              for (size_t i = 0; i < c.size(); ++i) {
                  auto n = Num::of(static_cast<std::int64_t>(i + 1));
                  total = total + truediv(c[i] * (pow(hi, n) - pow(lo, n)), n);
              }
              return total.json();
          },
          {{{"coefficients", {1, 2, 3}}, {"lower", 0}, {"upper", 1}},
           {{"coefficients", {0.5, -1}}, {"lower", -2}, {"upper", 2.5}}});
    b.def("sine", {K::Number}, [](const Json& a) { return Json(std::sin(num(a, "angle").f())); },
          {{{"angle", 0}}, {{"angle", 1.2}}});
    b.def("cosine", {K::Number}, [](const Json& a) { return Json(std::cos(num(a, "angle").f())); },
          {{{"angle", 0}}, {{"angle", 1.2}}});
    b.def("tangent", {K::Number}, [](const Json& a) { return Json(std::tan(num(a, "angle").f())); },
          {{{"angle", 0}}, {{"angle", 1.2}}});
    b.def("degrees_to_radians", {K::Number},
          [](const Json& a) {
              return truediv(num(a, "degrees") * Num::of(std::numbers::pi), Num::of(std::int64_t{180})).json();
          },
          {{{"degrees", 180}}, {{"degrees", 45.5}}});
    b.def("radians_to_degrees", {K::Number},
          [](const Json& a) {
              return truediv(num(a, "radians") * Num::of(std::int64_t{180}), Num::of(std::numbers::pi)).json();
          },
          {{{"radians", 1}}, {{"radians", 0.25}}});
    b.def("exponential_growth", {K::Number, K::Number, K::Number},
          [](const Json& a) {
              auto exponent = (num(a, "rate") * num(a, "time")).f();
              return (num(a, "initial") * Num::of(std::exp(exponent))).json();
          },
          {{{"initial", 100}, {"rate", 0.05}, {"time", 10}}, {{"initial", 2}, {"rate", -1}, {"time", 3}}});
}

void analysis(Builder& b)
{
    b.module = "analysis";
    b.def("absolute_value", {K::Number}, [](const Json& a) { return abs(num(a, "x")).json(); },
          {{{"x", -7}}, {{"x", 2.5}}});
    b.def("sign", {K::Number},
          [](const Json& a) {
              auto x = num(a, "x").f();
              return Json(x > 0 ? 1 : x < 0 ? -1 : 0);
          },
          {{{"x", -7}}, {{"x", 0}}, {{"x", 0.5}}});
    b.def("clamp", {K::Number, K::Number, K::Number},
          [](const Json& a) {
              auto v = num(a, "value"), lo = num(a, "lower"), hi = num(a, "upper");
              if (lo.f() > hi.f())
                  value_error("The lower bound must not exceed the upper bound.");
              if (v.f() < lo.f())
                  return lo.json();
              if (v.f() > hi.f())
                  return hi.json();
              return v.json();
          },
          {{{"value", 15}, {"lower", 0}, {"upper", 10}}, {{"value", -2.5}, {"lower", -1}, {"upper", 1}},
           {{"value", 1}, {"lower", 2}, {"upper", 1}}});
    b.def("floor_value", {K::Number},
          [](const Json& a) {
              auto x = num(a, "x");
              return x.is_int ? Json(x.i) : Json(floor_int(x.d));
          },
          {{{"x", 2.7}}, {{"x", -2.3}}, {{"x", 5}}});
    b.def("ceiling_value", {K::Number},
          [](const Json& a) {
              auto x = num(a, "x");
              return x.is_int ? Json(x.i) : Json(-floor_int(-x.d));
          },
          {{{"x", 2.3}}, {{"x", -2.7}}, {{"x", 5}}});
    b.def("round_to_decimals", {K::Number, K::Integer},
          [](const Json& a) {
              auto x = num(a, "x");
              auto decimals = integer(a, "decimals");
              if (decimals < 0)
                  value_error("The number of decimals must be non-negative.");
              if (x.is_int || !std::isfinite(x.d) || decimals > 300)
                  return x.json();
              // printf rounds the exact binary value half-to-even, as Python's round() does.
              char buffer[512];
              std::snprintf(buffer, sizeof buffer, "%.*f", static_cast<int>(decimals), x.d);
              return Json(std::strtod(buffer, nullptr));
          },
          {{{"x", 11.532562594670797}, {"decimals", 2}}, {{"x", 2.675}, {"decimals", 2}}, {{"x", 0.125}, {"decimals", 2}},
           {{"x", 7}, {"decimals", 1}}});
    b.def("exponential", {K::Number}, [](const Json& a) { return Json(std::exp(num(a, "x").f())); },
          {{{"x", 1}}, {{"x", -0.5}}});
    b.def("natural_logarithm", {K::Number},
          [](const Json& a) {
              auto x = num(a, "x").f();
              if (x <= 0)
                  value_error("The logarithm is only defined for positive numbers.");
              return Json(std::log(x));
          },
          {{{"x", 10}}, {{"x", 0.5}}, {{"x", 0}}});
    b.def("logarithm_base", {K::Number, K::Number},
          [](const Json& a) {
              auto x = num(a, "x").f(), base = num(a, "base").f();
              if (x <= 0 || base <= 0 || base == 1)
                  value_error("Invalid argument for the logarithm.");
              return Json(std::log(x) / std::log(base));
          },
          {{{"x", 8}, {"base", 2}}, {{"x", 1000}, {"base", 10}}, {{"x", 5}, {"base", 1}}});
    b.def("nth_root", {K::Number, K::Integer},
          [](const Json& a) {
              auto x = num(a, "x").f();
              auto n = integer(a, "n");
              if (n <= 0)
                  value_error("The degree must be positive.");
              double e = 1.0 / static_cast<double>(n);
              if (x < 0) {
                  if (n % 2 == 0)
                      value_error("Even roots of negative numbers are not real.");
                  return Json(-std::pow(-x, e));
              }
              return Json(std::pow(x, e));
          },
          {{{"x", 27}, {"n", 3}}, {{"x", -32}, {"n", 5}}, {{"x", 2}, {"n", 2}}, {{"x", -4}, {"n", 2}}});
}

void logic(Builder& b)
{
    b.module = "logic";
    const std::vector<Json> pairs = {{{"a", true}, {"b", true}},
                                     {{"a", true}, {"b", false}},
                                     {{"a", false}, {"b", true}},
                                     {{"a", false}, {"b", false}}};
    auto binary = [&](std::string name, bool (*op)(bool, bool)) {
        b.def(std::move(name), {K::Boolean, K::Boolean},
              [op](const Json& a) { return Json(op(boolean(a, "a"), boolean(a, "b"))); }, pairs);
    };
    binary("logical_and", [](bool x, bool y) { return x && y; });
    binary("logical_or", [](bool x, bool y) { return x || y; });
    binary("logical_xor", [](bool x, bool y) { return x != y; });
    b.def("logical_not", {K::Boolean}, [](const Json& a) { return Json(!boolean(a, "a")); },
          {{{"a", true}}, {{"a", false}}});
    binary("implies", [](bool x, bool y) { return !x || y; });
    binary("logical_nand", [](bool x, bool y) { return !(x && y); });
    binary("logical_nor", [](bool x, bool y) { return !(x || y); });
    binary("equivalent", [](bool x, bool y) { return x == y; });
    auto trues = [](const Json& a) {
        std::int64_t count = 0;
        for (const auto& v : a.at("values"))
            count += v.get<bool>() ? 1 : 0;
        return count;
    };
    b.def("count_true", {K::Array}, [=](const Json& a) { return Json(trues(a)); },
          {{{"values", {true, false, true}}}, {{"values", Json::array()}}});
    b.def("majority", {K::Array},
          [=](const Json& a) { return Json(2 * trues(a) > static_cast<std::int64_t>(a.at("values").size())); },
          {{{"values", {true, false, true}}}, {{"values", {true, false}}}, {{"values", Json::array()}}});
}

void set_theory(Builder& b)
{
    b.module = "set_theory";
    const std::vector<Json> pairs = {{{"first", {1, 2, 3, 3}}, {"second", {3, 4}}},
                                     {{"first", {5.5, 1}}, {"second", {1.0, 2, 5.5}}},
                                     {{"first", Json::array()}, {"second", {2}}}};
    auto sets = [](const Json& a) { return std::pair{distinct(numbers(a, "first")), distinct(numbers(a, "second"))}; };
    b.def("set_union", {K::Array, K::Array},
          [=](const Json& a) {
              auto [x, y] = sets(a);
              for (const auto& n : y)
                  if (!contains(x, n))
                      x.push_back(n);
              return to_json(sorted(x));
          },
          pairs);
    b.def("set_intersection", {K::Array, K::Array},
          [=](const Json& a) {
              auto [x, y] = sets(a);
              std::vector<Num> out;
              for (const auto& n : x)
                  if (contains(y, n))
                      out.push_back(n);
              return to_json(sorted(out));
          },
          pairs);
    b.def("set_difference", {K::Array, K::Array},
          [=](const Json& a) {
              auto [x, y] = sets(a);
              std::vector<Num> out;
              for (const auto& n : x)
                  if (!contains(y, n))
                      out.push_back(n);
              return to_json(sorted(out));
          },
          pairs);
    b.def("symmetric_difference", {K::Array, K::Array},
          [=](const Json& a) {
              auto [x, y] = sets(a);
              std::vector<Num> out;
              for (const auto& n : x)
                  if (!contains(y, n))
                      out.push_back(n);
              for (const auto& n : y)
                  if (!contains(x, n))
                      out.push_back(n);
              return to_json(sorted(out));
          },
          pairs);
    b.def("is_subset", {K::Array, K::Array},
          [=](const Json& a) {
              auto [x, y] = sets(a);
              return Json(std::all_of(x.begin(), x.end(), [&](const Num& n) { return contains(y, n); }));
          },
          pairs);
    b.def("cardinality", {K::Array},
          [](const Json& a) { return Json(static_cast<std::int64_t>(distinct(numbers(a, "values")).size())); },
          {{{"values", {1, 2, 2, 3.0, 3}}}, {{"values", Json::array()}}});
    b.def("power_set_size", {K::Integer},
          [](const Json& a) {
              auto n = integer(a, "n");
              if (n < 0)
                  value_error("The number of elements must be non-negative.");
              if (n < 63)
                  return Json(std::int64_t{1} << n);
              return Json(std::ldexp(1.0, static_cast<int>(std::min<std::int64_t>(n, 2000))));
          },
          {{{"n", 5}}, {{"n", 0}}, {{"n", 40}}});
    b.def("jaccard_index", {K::Array, K::Array},
          [=](const Json& a) {
              auto [x, y] = sets(a);
              if (x.empty() && y.empty())
                  return Json(1.0);
              std::size_t common = 0;
              for (const auto& n : x)
                  common += contains(y, n) ? 1 : 0;
              auto joined = x.size() + y.size() - common;
              return Json(static_cast<double>(common) / static_cast<double>(joined));
          },
          {{{"first", {1, 2, 3}}, {"second", {2, 3, 4}}}, {{"first", Json::array()}, {"second", Json::array()}}});
    b.def("cartesian_product_size", {K::Integer, K::Integer},
          [](const Json& a) {
              auto x = integer(a, "first_size"), y = integer(a, "second_size");
              if (x < 0 || y < 0)
                  value_error("Set sizes must be non-negative.");
              return wide(static_cast<__int128>(x) * y);
          },
          {{{"first_size", 3}, {"second_size", 4}}, {{"first_size", 0}, {"second_size", 9}}});
    b.def("are_disjoint", {K::Array, K::Array},
          [=](const Json& a) {
              auto [x, y] = sets(a);
              return Json(std::none_of(x.begin(), x.end(), [&](const Num& n) { return contains(y, n); }));
          },
          {{{"first", {1, 2}}, {"second", {3, 4}}}, {{"first", {1, 2}}, {"second", {2.0}}}});
}

void probability(Builder& b)
{
    b.module = "probability";
    b.def("permutations", {K::Integer, K::Integer},
          [](const Json& a) {
              auto n = integer(a, "n"), k = integer(a, "k");
              if (n < 0 || k < 0)
                  value_error("Both arguments must be non-negative.");
              if (k > n)
                  return Json(0);
              __int128 r = 1;
              for (std::int64_t i = n - k + 1; i <= n; ++i) {
                  r *= i;
                  if (r > (__int128(1) << 100)) {
                      double f = 1.0;
                      for (std::int64_t j = n - k + 1; j <= n; ++j)
                          f *= static_cast<double>(j);
                      return Json(f);
                  }
              }
              return wide(r);
          },
          {{{"n", 5}, {"k", 3}}, {{"n", 3}, {"k", 5}}, {{"n", 10}, {"k", 0}}});
    b.def("binomial_probability", {K::Integer, K::Integer, K::Number},
          [](const Json& a) {
              auto t = integer(a, "trials"), s = integer(a, "successes");
              auto p = num(a, "probability");
              check_probability(p.f());
              if (t < 0 || s < 0 || s > t)
                  value_error("Invalid number of trials or successes.");
              auto q = Num::of(std::int64_t{1}) - p;
              return (comb_num(t, s) * pow(p, Num::of(s)) * pow(q, Num::of(t - s))).json();
          },
          {{{"trials", 10}, {"successes", 3}, {"probability", 0.5}}, {{"trials", 5}, {"successes", 5}, {"probability", 1}},
           {{"trials", 5}, {"successes", 6}, {"probability", 0.5}}});
    b.def("complement_probability", {K::Number},
          [](const Json& a) {
              auto p = num(a, "probability");
              check_probability(p.f());
              return (Num::of(std::int64_t{1}) - p).json();
          },
          {{{"probability", 0.3}}, {{"probability", 1}}, {{"probability", 1.5}}});
    b.def("independent_events_probability", {K::Number, K::Number},
          [](const Json& a) {
              auto x = num(a, "p_a"), y = num(a, "p_b");
              if (!(0 <= x.f() && x.f() <= 1 && 0 <= y.f() && y.f() <= 1))
                  value_error("Probabilities must lie between 0 and 1.");
              return (x * y).json();
          },
          {{{"p_a", 0.5}, {"p_b", 0.2}}, {{"p_a", 1}, {"p_b", 1}}});
    b.def("union_probability", {K::Number, K::Number, K::Number},
          [](const Json& a) { return (num(a, "p_a") + num(a, "p_b") - num(a, "p_both")).json(); },
          {{{"p_a", 0.5}, {"p_b", 0.4}, {"p_both", 0.2}}});
    b.def("conditional_probability", {K::Number, K::Number},
          [](const Json& a) {
              if (num(a, "p_given").f() <= 0)
                  value_error("The conditioning probability must be positive.");
              return truediv(num(a, "p_both"), num(a, "p_given")).json();
          },
          {{{"p_both", 0.12}, {"p_given", 0.4}}, {{"p_both", 0.1}, {"p_given", 0}}});
    b.def("expected_value", {K::Array, K::Array},
          [](const Json& a) {
              auto v = numbers(a, "values"), p = numbers(a, "probabilities");
              if (v.size() != p.size())
                  value_error("Values and probabilities must have the same length.");
              Num total = Num::of(std::int64_t{0});
              for (size_t i = 0; i < v.size(); ++i)
                  total = total + v[i] * p[i];
              return total.json();
          },
          {{{"values", {1, 2, 3}}, {"probabilities", {0.2, 0.5, 0.3}}},
           {{"values", {1, 2}}, {"probabilities", {1}}}});
    b.def("geometric_distribution_probability", {K::Number, K::Integer},
          [](const Json& a) {
              auto p = num(a, "probability");
              auto k = integer(a, "trial");
              if (k < 1)
                  value_error("The trial index must be positive.");
              return (pow(Num::of(std::int64_t{1}) - p, Num::of(k - 1)) * p).json();
          },
          {{{"probability", 0.25}, {"trial", 3}}, {{"probability", 0.5}, {"trial", 0}}});
    b.def("poisson_probability", {K::Number, K::Integer},
          [](const Json& a) {
              auto rate = num(a, "rate");
              auto k = integer(a, "occurrences");
              if (rate.f() < 0 || k < 0)
                  value_error("Rate and occurrences must be non-negative.");
              auto numerator = pow(rate, Num::of(k)) * Num::of(std::exp(-rate.f()));
              return Json(numerator.f() / factorial_f(k));
          },
          {{{"rate", 3}, {"occurrences", 2}}, {{"rate", 0.5}, {"occurrences", 0}}});
    b.def("bayes_theorem", {K::Number, K::Number, K::Number},
          [](const Json& a) {
              if (num(a, "evidence").f() <= 0)
                  value_error("The evidence probability must be positive.");
              return truediv(num(a, "likelihood") * num(a, "prior"), num(a, "evidence")).json();
          },
          {{{"likelihood", 0.9}, {"prior", 0.01}, {"evidence", 0.05}}});
}

std::vector<NativeFunction> build()
{
    Builder b;
    math_tools(b);
    number_theory(b);
    algebra(b);
    geometry(b);
    statistics(b);
    calculus(b);
    analysis(b);
    logic(b);
    set_theory(b);
    probability(b);
    return std::move(b.out);
}

} // namespace

const std::vector<NativeFunction>& math_natives()
{
    static const std::vector<NativeFunction> natives = build();
    return natives;
}

fs::path data_dir()
{
    if (const char* env = std::getenv("TULIP_DATA_DIR"); env && *env)
        return env;
    for (const char* candidate : {TULIP_SOURCE_DATA_DIR, TULIP_INSTALL_DATA_DIR})
        if (*candidate && fs::is_directory(candidate))
            return candidate;
    return "data";
}

fs::path math_dir()
{
    return data_dir() / "corpus" / "math";
}

std::vector<ModuleSource> math_modules(const fs::path& dir)
{
    auto sources = read_tool_dir(dir);
    for (auto& s : sources)
        s.binding = Binding::Native;
    return sources;
}

std::size_t register_math_natives(Runtime& runtime, const ToolLibrary& library)
{
    std::size_t registered = 0;
    for (const auto& native : math_natives()) {
        auto entry = library.find(native.id());
        if (!entry || entry->binding != Binding::Native || runtime.has_native(native.id()))
            continue;
        runtime.register_native(entry->descriptor, native.tool);
        ++registered;
    }
    return registered;
}

} // namespace tulip::corpus
