const { UserCard } = require('./user');
const { fetchUser } = require('./api');

const card = new UserCard(7);
card.load().then(() => console.log(card.render()));

fetchUser(1).then((u) => console.log(u));

function boot() {
  return new UserCard(1).load();
}

module.exports = { boot };
