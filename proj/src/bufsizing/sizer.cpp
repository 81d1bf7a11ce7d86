#include "bufsim/bufsizing/sizer.hpp"

#include <algorithm>

namespace bufsim::bufsizing {

namespace {
template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;
}  // namespace

double AStarController::limit() const { return std::min(ebdp_.limit(), alt_.limit()); }

double BufferSizer::limit() const {
  return std::visit(Overloaded{
                        [](const FixedLimit& f) { return f.packets; },
                        [](const auto& c) { return c.limit(); },
                    },
                    policy_);
}

std::string BufferSizer::name() const {
  return std::visit(Overloaded{
                        [](const FixedLimit&) { return std::string("fixed"); },
                        [](const EbdpController&) { return std::string("ebdp"); },
                        [](const AltController&) { return std::string("alt"); },
                        [](const AStarController&) { return std::string("astar"); },
                    },
                    policy_);
}

void BufferSizer::on_service(const ServiceSample& s) {
  if (auto* e = std::get_if<EbdpController>(&policy_)) {
    e->update_service_time(s.t_s, s.t_e, std::max(s.packets, s.capacity));
  } else if (auto* a = std::get_if<AStarController>(&policy_)) {
    a->ebdp().update_service_time(s.t_s, s.t_e, std::max(s.packets, s.capacity));
  }
}

void BufferSizer::on_occupancy(SimTime now, double occupancy) {
  if (auto* a = std::get_if<AltController>(&policy_)) {
    a->observe(now, occupancy);
  } else if (auto* s = std::get_if<AStarController>(&policy_)) {
    s->alt().observe(now, occupancy);
  }
}

std::optional<double> BufferSizer::interval() const {
  if (auto* a = std::get_if<AltController>(&policy_)) return a->params().interval;
  if (auto* s = std::get_if<AStarController>(&policy_)) return s->alt().params().interval;
  return std::nullopt;
}

void BufferSizer::close_interval(SimTime now) {
  if (auto* a = std::get_if<AltController>(&policy_)) {
    a->close_interval(now);
  } else if (auto* s = std::get_if<AStarController>(&policy_)) {
    s->alt().close_interval(now);
  }
}

}  // namespace bufsim::bufsizing
