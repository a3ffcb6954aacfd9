var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
/*
 * multi-line
 * header
 */
var mx = ee.Image(1).max(2);
var s3 = 'it\'s // fine'; // escaped quote
// standalone comment 80
var n = ee.Number(4) // comment between
  .sqrt();
/*
 * multi-line
 * header
 */
var mx = ee.Image(1).max(2);
var o = {a: 1, /* key */ b: 'x//y'}; // object
var r2 = /[/]+/.test('a//b');
// standalone comment 86
var tpl = `a${`nested ${'//'} tpl`}b`; // nested template
