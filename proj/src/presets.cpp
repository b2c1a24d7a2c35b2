#include "momfilter/experiment.hpp"

namespace momfilter {

namespace {

// Fixed parameter sets for the six benchmark scenarios. Seeds are fixed so
// reruns are byte-identical.
constexpr const char* kFig1 = R"(
[experiment]
name = fig1
horizon = 3.0
dt = 0.001

[model]
kind = cir
theta = 0.1
mu = 1.0
sigma = 0.15

[grid]
modes = 129
stencil = 4
carrier = auto

[output]
z_lo = 0.0
z_hi = 2.0
points = 401

[oracle]
kind = cir

[variant.order0]
solver = unconditional
order = 0

[variant.order1]
solver = unconditional
order = 1

[variant.order2]
solver = unconditional
order = 2

[variant.order3]
solver = unconditional
order = 3
)";

constexpr const char* kFig2 = R"(
[experiment]
name = fig2
horizon = 3.0
dt = 0.001

[model]
kind = cir
theta = 0.1
mu = 1.0
sigma = 0.33

[grid]
modes = 129
stencil = 4
carrier = auto

[output]
z_lo = 0.0
z_hi = 3.0
points = 601

[oracle]
kind = cir

[variant.order0]
solver = unconditional
order = 0

[variant.order1]
solver = unconditional
order = 1

[variant.order2]
solver = unconditional
order = 2

[variant.order3]
solver = unconditional
order = 3
)";

constexpr const char* kFig3 = R"(
[experiment]
name = fig3
horizon = 1.0
dt = 0.001

[model]
kind = benes
a = 0.8
sigma = 0.5
h1 = 0.8
h2 = 0.5

[fit]
w = 2.0
degree = 11
range = 5
step = 0.2

[grid]
modes = 129
stencil = 4
reach = auto
reach_cap = 8
carrier = auto

[path]
seed = 1
steps = 1000

[output]
z_lo = -2.5
z_hi = 2.5
points = 501

[oracle]
kind = benes

[variant.plain0]
order = 0

[variant.plain1]
order = 1

[variant.plain3]
order = 3

[variant.plain20]
order = 20

[variant.sub100]
order = 1
substeps = 100

[variant.sub1000]
order = 1
substeps = 1000
max_linf_rel = 0.02
)";

constexpr const char* kFig4 = R"(
[experiment]
name = fig4
horizon = 1.0
dt = 0.001

[model]
kind = benes
a = 0.5
sigma = 0.5
h1 = 10.0
h2 = 0.5

[fit]
w = 2.0
degree = 11
range = 5
step = 0.2

[grid]
modes = 129
stencil = 4
reach = auto
reach_cap = 8
carrier = auto

[path]
seed = 1
steps = 1000

[output]
z_lo = -2.5
z_hi = 2.5
points = 501

[oracle]
kind = benes

[variant.plain1]
order = 1
expect_failure = true

[variant.sub100]
order = 1
substeps = 100

[variant.sub125]
order = 1
substeps = 125

[variant.sub200]
order = 1
substeps = 200

[variant.sub1000]
order = 1
substeps = 1000
max_linf_rel = 0.03

[variant.prior]
solver = unconditional
order = 1
substeps = 1000
)";

constexpr const char* kSweepHeader = R"(
[experiment]
name = %NAME%
horizon = 1.0
dt = 0.001

[model]
kind = benes
a = %A%
sigma = 0.5
h1 = %H1%
h2 = 0.5

[fit]
w = 2.0
degree = 11
range = 5
step = 0.2

[grid]
modes = 129
stencil = 4
reach = auto
reach_cap = 8
carrier = auto

[path]
seed = 1
steps = 1000

[output]
z_lo = -2.5
z_hi = 2.5
points = 501

[oracle]
kind = benes

[variant.w0.0]
order = 1
substeps = 1000
w = 0.0

[variant.w0.5]
order = 1
substeps = 1000
w = 0.5

[variant.w1.0]
order = 1
substeps = 1000
w = 1.0

[variant.w2.0]
order = 1
substeps = 1000
w = 2.0

[variant.w2.5]
order = 1
substeps = 1000
w = 2.5

[variant.w4.0]
order = 1
substeps = 1000
w = 4.0
)";

std::string sweep(const std::string& name, const std::string& a, const std::string& h1) {
  std::string s = kSweepHeader;
  auto sub = [&](const std::string& key, const std::string& val) {
    for (std::size_t p = s.find(key); p != std::string::npos; p = s.find(key, p))
      s.replace(p, key.size(), val);
  };
  sub("%NAME%", name);
  sub("%A%", a);
  sub("%H1%", h1);
  return s;
}

}  // namespace

std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6"}; }

std::string preset_text(const std::string& name) {
  if (name == "fig1") return kFig1;
  if (name == "fig2") return kFig2;
  if (name == "fig3") return kFig3;
  if (name == "fig4") return kFig4;
  if (name == "fig5") return sweep("fig5", "1.5", "0.7");
  if (name == "fig6") return sweep("fig6", "2.0", "1.0");
  throw ConfigError("unknown preset '" + name + "' (fig1 .. fig6)");
}

ExperimentConfig load_preset(const std::string& name) { return parse_config(preset_text(name)); }

}  // namespace momfilter
