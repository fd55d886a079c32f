// Inception-v3 without the auxiliary classifier, and its desk variant. Module
// and tensor names follow torchvision (Mixed_5b.branch1x1.conv.weight, ...).

#include "builders.hpp"

namespace numta::models {
namespace {

using nn::ActivationKind;

constexpr double kEps = 1e-3;

// conv (no bias) -> batch norm -> relu
std::unique_ptr<nn::Sequential> basic(std::size_t in, std::size_t out, std::size_t kh, std::size_t kw,
                                      std::size_t stride = 1, std::size_t ph = 0, std::size_t pw = 0) {
  auto s = std::make_unique<nn::Sequential>();
  s->add("conv", make_conv(in, out, kh, kw, stride, ph, pw));
  s->add("bn", std::make_unique<nn::BatchNorm2d>(out, kEps));
  s->add("relu", make_act(ActivationKind::relu));
  return s;
}

std::unique_ptr<nn::Sequential> chain() { return std::make_unique<nn::Sequential>(); }

std::unique_ptr<nn::Sequential> avg_then(std::size_t in, std::size_t out, const std::string& name) {
  auto b = chain();
  b->add("", std::make_unique<nn::AvgPool2d>(3, 1, 1, true));
  b->add(name, basic(in, out, 1, 1));
  return b;
}

struct Widths {
  std::size_t b1x1, b5x5_1, b5x5_2, b3dbl_1, b3dbl_2, pool;
};

// 1x1 | 1x1->5x5 | 1x1->3x3->3x3 | avgpool->1x1
std::unique_ptr<nn::Concat> inception_a(std::size_t in, const Widths& w, std::size_t& out) {
  auto m = std::make_unique<nn::Concat>();
  auto b1 = chain();
  b1->add("branch1x1", basic(in, w.b1x1, 1, 1));
  m->add_branch(std::move(b1));
  auto b2 = chain();
  b2->add("branch5x5_1", basic(in, w.b5x5_1, 1, 1));
  b2->add("branch5x5_2", basic(w.b5x5_1, w.b5x5_2, 5, 5, 1, 2, 2));
  m->add_branch(std::move(b2));
  auto b3 = chain();
  b3->add("branch3x3dbl_1", basic(in, w.b3dbl_1, 1, 1));
  b3->add("branch3x3dbl_2", basic(w.b3dbl_1, w.b3dbl_2, 3, 3, 1, 1, 1));
  b3->add("branch3x3dbl_3", basic(w.b3dbl_2, w.b3dbl_2, 3, 3, 1, 1, 1));
  m->add_branch(std::move(b3));
  m->add_branch(avg_then(in, w.pool, "branch_pool"));
  out = w.b1x1 + w.b5x5_2 + w.b3dbl_2 + w.pool;
  return m;
}

// grid reduction: 3x3/2 | 1x1->3x3->3x3/2 | maxpool/2
std::unique_ptr<nn::Concat> inception_b(std::size_t in, std::size_t b3x3, std::size_t dbl_1, std::size_t dbl_2,
                                        std::size_t& out) {
  auto m = std::make_unique<nn::Concat>();
  auto b1 = chain();
  b1->add("branch3x3", basic(in, b3x3, 3, 3, 2));
  m->add_branch(std::move(b1));
  auto b2 = chain();
  b2->add("branch3x3dbl_1", basic(in, dbl_1, 1, 1));
  b2->add("branch3x3dbl_2", basic(dbl_1, dbl_2, 3, 3, 1, 1, 1));
  b2->add("branch3x3dbl_3", basic(dbl_2, dbl_2, 3, 3, 2));
  m->add_branch(std::move(b2));
  auto b3 = chain();
  b3->add("", std::make_unique<nn::MaxPool2d>(3, 2));
  m->add_branch(std::move(b3));
  out = b3x3 + dbl_2 + in;
  return m;
}

// factorised 7x7: 1x1 | 1x1->1x7->7x1 | 1x1->7x1->1x7->7x1->1x7 | avgpool->1x1
std::unique_ptr<nn::Concat> inception_c(std::size_t in, std::size_t c7) {
  auto m = std::make_unique<nn::Concat>();
  auto b1 = chain();
  b1->add("branch1x1", basic(in, 192, 1, 1));
  m->add_branch(std::move(b1));
  auto b2 = chain();
  b2->add("branch7x7_1", basic(in, c7, 1, 1));
  b2->add("branch7x7_2", basic(c7, c7, 1, 7, 1, 0, 3));
  b2->add("branch7x7_3", basic(c7, 192, 7, 1, 1, 3, 0));
  m->add_branch(std::move(b2));
  auto b3 = chain();
  b3->add("branch7x7dbl_1", basic(in, c7, 1, 1));
  b3->add("branch7x7dbl_2", basic(c7, c7, 7, 1, 1, 3, 0));
  b3->add("branch7x7dbl_3", basic(c7, c7, 1, 7, 1, 0, 3));
  b3->add("branch7x7dbl_4", basic(c7, c7, 7, 1, 1, 3, 0));
  b3->add("branch7x7dbl_5", basic(c7, 192, 1, 7, 1, 0, 3));
  m->add_branch(std::move(b3));
  m->add_branch(avg_then(in, 192, "branch_pool"));
  return m;
}

// grid reduction: 1x1->3x3/2 | 1x1->1x7->7x1->3x3/2 | maxpool/2
std::unique_ptr<nn::Concat> inception_d(std::size_t in) {
  auto m = std::make_unique<nn::Concat>();
  auto b1 = chain();
  b1->add("branch3x3_1", basic(in, 192, 1, 1));
  b1->add("branch3x3_2", basic(192, 320, 3, 3, 2));
  m->add_branch(std::move(b1));
  auto b2 = chain();
  b2->add("branch7x7x3_1", basic(in, 192, 1, 1));
  b2->add("branch7x7x3_2", basic(192, 192, 1, 7, 1, 0, 3));
  b2->add("branch7x7x3_3", basic(192, 192, 7, 1, 1, 3, 0));
  b2->add("branch7x7x3_4", basic(192, 192, 3, 3, 2));
  m->add_branch(std::move(b2));
  auto b3 = chain();
  b3->add("", std::make_unique<nn::MaxPool2d>(3, 2));
  m->add_branch(std::move(b3));
  return m;
}

// expanded filter bank: 1x1 | 1x1->{1x3,3x1} | 1x1->3x3->{1x3,3x1} | avgpool->1x1
std::unique_ptr<nn::Concat> inception_e(std::size_t in) {
  auto m = std::make_unique<nn::Concat>();
  auto b1 = chain();
  b1->add("branch1x1", basic(in, 320, 1, 1));
  m->add_branch(std::move(b1));

  auto b2 = chain();
  b2->add("branch3x3_1", basic(in, 384, 1, 1));
  auto split2 = std::make_unique<nn::Concat>();
  auto s2a = chain();
  s2a->add("branch3x3_2a", basic(384, 384, 1, 3, 1, 0, 1));
  split2->add_branch(std::move(s2a));
  auto s2b = chain();
  s2b->add("branch3x3_2b", basic(384, 384, 3, 1, 1, 1, 0));
  split2->add_branch(std::move(s2b));
  b2->add("", std::move(split2));
  m->add_branch(std::move(b2));

  auto b3 = chain();
  b3->add("branch3x3dbl_1", basic(in, 448, 1, 1));
  b3->add("branch3x3dbl_2", basic(448, 384, 3, 3, 1, 1, 1));
  auto split3 = std::make_unique<nn::Concat>();
  auto s3a = chain();
  s3a->add("branch3x3dbl_3a", basic(384, 384, 1, 3, 1, 0, 1));
  split3->add_branch(std::move(s3a));
  auto s3b = chain();
  s3b->add("branch3x3dbl_3b", basic(384, 384, 3, 1, 1, 1, 0));
  split3->add_branch(std::move(s3b));
  b3->add("", std::move(split3));
  m->add_branch(std::move(b3));

  m->add_branch(avg_then(in, 192, "branch_pool"));
  return m;
}

}  // namespace

Backbone inceptionv3_backbone() {
  auto net = std::make_unique<nn::Sequential>();
  net->add("Conv2d_1a_3x3", basic(3, 32, 3, 3, 2));
  net->add("Conv2d_2a_3x3", basic(32, 32, 3, 3));
  net->add("Conv2d_2b_3x3", basic(32, 64, 3, 3, 1, 1, 1));
  net->add("maxpool1", std::make_unique<nn::MaxPool2d>(3, 2));
  net->add("Conv2d_3b_1x1", basic(64, 80, 1, 1));
  net->add("Conv2d_4a_3x3", basic(80, 192, 3, 3));
  net->add("maxpool2", std::make_unique<nn::MaxPool2d>(3, 2));

  std::size_t ch = 0;
  net->add("Mixed_5b", inception_a(192, {64, 48, 64, 64, 96, 32}, ch));
  net->add("Mixed_5c", inception_a(ch, {64, 48, 64, 64, 96, 64}, ch));
  net->add("Mixed_5d", inception_a(ch, {64, 48, 64, 64, 96, 64}, ch));
  net->add("Mixed_6a", inception_b(ch, 384, 64, 96, ch));
  net->add("Mixed_6b", inception_c(ch, 128));
  net->add("Mixed_6c", inception_c(768, 160));
  net->add("Mixed_6d", inception_c(768, 160));
  net->add("Mixed_6e", inception_c(768, 192));
  net->add("Mixed_7a", inception_d(768));
  net->add("Mixed_7b", inception_e(1280));
  net->add("Mixed_7c", inception_e(2048));
  return {std::move(net), 2048};
}

Backbone desk_inception_backbone() {
  auto net = std::make_unique<nn::Sequential>();
  net->add("Conv2d_1a_3x3", basic(3, 16, 3, 3, 2, 1, 1));
  net->add("maxpool1", std::make_unique<nn::MaxPool2d>(3, 2, 1));
  std::size_t ch = 0;
  net->add("Mixed_5b", inception_a(16, {8, 6, 8, 8, 12, 8}, ch));
  net->add("Mixed_6a", inception_b(ch, 16, 8, 12, ch));
  return {std::move(net), ch};
}

}  // namespace numta::models
